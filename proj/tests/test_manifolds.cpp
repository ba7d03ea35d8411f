#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "wavefront/manifolds.hpp"

using namespace wavefront;
using namespace wavefront::testing;

namespace {

CriticalPoint origin_of(const PotentialModel& model) {
    return classify_critical_point(model, Vec::Zero(model.dimension()));
}

}  // namespace

TEST_CASE("linear potential: manifold is the subspace ball, refined = linear") {
    auto model = make_quadratic(2);
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);

    ManifoldOptions lin;
    lin.order = ManifoldOrder::linear;
    lin.radius = 0.3;
    LocalManifold wl = LocalManifold::build(model, sp, ManifoldKind::unstable, lin);

    ManifoldOptions ref;
    ref.order = ManifoldOrder::refined;
    ref.radius = 0.3;
    LocalManifold wr = LocalManifold::build(model, sp, ManifoldKind::unstable, ref);

    Vec b(2);
    b << 1.0, 0.7;
    const Vec linear_pt = pack(wl.sample_boundary(b));
    const Vec refined_pt = pack(wr.sample_boundary(b));
    // Exactly quadratic potential: the graph term vanishes identically.
    const Vec expected = wl.equilibrium_state() + 0.3 * (wl.tangent_basis() * b.normalized());
    CHECK((linear_pt - expected).norm() < 1e-12);
    CHECK(std::abs((refined_pt - wr.equilibrium_state()).norm() - 0.3) < 1e-9);
    // Refined points lie on the same subspace.
    const Mat basis = wr.tangent_basis();
    const Vec off = refined_pt - wr.equilibrium_state();
    CHECK((off - basis * (basis.transpose() * off)).norm() < 1e-9);
}

TEST_CASE("antipodal boundary samples are symmetric for the linear order") {
    auto model = make_quadratic(2);
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    ManifoldOptions lin;
    lin.order = ManifoldOrder::linear;
    lin.radius = 0.2;
    LocalManifold w = LocalManifold::build(model, sp, ManifoldKind::stable, lin);
    Vec b(2);
    b << 0.3, -0.9;
    const Vec p = pack(w.sample_boundary(b));
    const Vec q = pack(w.sample_boundary(Vec(-b)));
    CHECK((p + q - 2.0 * w.equilibrium_state()).norm() < 1e-12);
}

TEST_CASE("fish unstable manifold boundary sits on the zero energy level") {
    auto model = make_fish();
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    ManifoldOptions opts;
    opts.radius = 1e-3;
    opts.kappa = 16.0;
    opts.order = ManifoldOrder::refined;
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, opts);
    for (double s : {+1.0, -1.0}) {
        const PhasePoint p = wu.sample_boundary(Vec::Constant(1, s));
        CHECK(std::abs(hamiltonian(*model, p)) <= 1e-9);
    }
}

TEST_CASE("every default-radius sample lies on the Hamiltonian level at c = 0") {
    auto model = make_double_well_2d();
    const CriticalPoint minimum =
        classify_critical_point(*model, (Vec(2) << 1.0, 0.0).finished());
    EquilibriumSpectrum sp = spectrum_at(*model, minimum, 0.0);
    const double level = -minimum.value;
    for (ManifoldKind kind : {ManifoldKind::unstable, ManifoldKind::stable}) {
        LocalManifold w = LocalManifold::build(model, sp, kind, {});
        Vec b(2);
        for (double angle = 0.1; angle < 6.2; angle += 0.75) {
            b << std::cos(angle), std::sin(angle);
            const PhasePoint p = w.sample_boundary(b);
            CHECK(std::abs(hamiltonian(*model, p) - level) <=
                  1e-8 * (1.0 + std::abs(minimum.value)));
        }
    }
}

TEST_CASE("strong splitting unavailable for a repeated smallest eigenvalue") {
    auto model = make_quadratic(2);
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    CHECK_THROWS_WITH_AS(LocalManifold::build(model, sp, ManifoldKind::strong_stable, {}),
                         doctest::Contains("strong splitting unavailable"), InvalidInputError);
}

TEST_CASE("radius validation: too-large radius is rejected with a suggestion") {
    auto model = make_fish();
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    ManifoldOptions opts;
    opts.radius = 10.0;
    try {
        LocalManifold::build(model, sp, ManifoldKind::unstable, opts);
        FAIL("expected RadiusError");
    } catch (const RadiusError& err) {
        CHECK(err.suggested_radius > 0.0);
        CHECK(err.suggested_radius < 10.0);
    }
}

TEST_CASE("graph invariance under the backward flow") {
    auto model = make_fish();
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    ManifoldOptions opts;  // default budget and radius
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, opts);
    const double r = wu.radius();
    const double budget = opts.nonlinearity_budget;

    for (double s : {+1.0, -1.0}) {
        const PhasePoint boundary = wu.sample_boundary(Vec::Constant(1, s));
        IntegrationOptions iopt;
        iopt.tol = 1e-12;
        IntegrationResult res = integrate(*model, 0.0, boundary, 0.0, -1.0, iopt);
        const PhasePoint pulled = res.trajectory.at(-1.0);
        CHECK(wu.distance_to(pulled) <= 10.0 * budget * r);
    }
}

TEST_CASE("membership: equilibrium and eigendirections") {
    auto model = make_quadratic(2);
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    ManifoldOptions opts;
    opts.radius = 0.5;
    LocalManifold ws = LocalManifold::build(model, sp, ManifoldKind::stable, opts);

    PhasePoint at_e = unpack(ws.equilibrium_state());
    auto m0 = ws.membership_test(at_e, 4.0);
    CHECK(m0.member);
    CHECK(m0.terminal_distance < 1e-12);

    // A stable eigenvector offset: exact member for the linear flow.
    PhasePoint on_stable = unpack(ws.equilibrium_state() + 0.4 * ws.tangent_basis().col(0));
    auto m1 = ws.membership_test(on_stable, 4.0);
    CHECK(m1.member);
    CHECK(m1.terminal_distance < 0.4);
}

TEST_CASE("membership: unstable axis is rejected by the strong stable manifold") {
    auto model = make_anisotropic(1.0, 4.0);
    EquilibriumSpectrum sp = spectrum_at(*model, origin_of(*model), 0.0);
    ManifoldOptions opts;
    opts.radius = 0.4;
    LocalManifold wss = LocalManifold::build(model, sp, ManifoldKind::strong_stable, opts);

    // Point on the unstable (mild) axis: expands under the forward flow.
    PhasePoint bad = unpack(wss.equilibrium_state() + 0.2 * sp.unstable_basis.col(0));
    auto m = wss.membership_test(bad, 4.0);
    CHECK(!m.member);

    // Point on the strong stable axis decays at the strong rate.
    PhasePoint good = unpack(wss.equilibrium_state() + 0.2 * sp.strong_stable_basis.col(0));
    auto ms = wss.membership_test(good, 4.0);
    CHECK(ms.member);
    CHECK(ms.fitted_rate == doctest::Approx(-2.0).epsilon(1e-3));

    // A mildly decaying point is a member of the plain stable manifold but
    // not of the strong one.
    LocalManifold ws = LocalManifold::build(model, sp, ManifoldKind::stable, opts);
    PhasePoint mild = unpack(ws.equilibrium_state() + 0.2 * sp.mild_basis.col(0));
    CHECK(ws.membership_test(mild, 4.0).member);
    CHECK(!wss.membership_test(mild, 4.0).member);
}

TEST_CASE("boundary parameterization dimension") {
    auto model = make_double_well_2d();
    const CriticalPoint minimum =
        classify_critical_point(*model, (Vec(2) << -1.0, 0.0).finished());
    EquilibriumSpectrum sp = spectrum_at(*model, minimum, 0.8);
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, {});
    LocalManifold ws = LocalManifold::build(model, sp, ManifoldKind::stable, {});
    CHECK(wu.tangent_dimension() == 2);
    CHECK(wu.boundary_parameter_dimension() == 1);
    CHECK(ws.tangent_dimension() == 2);
    CHECK(ws.boundary_parameter_dimension() == 1);
}

TEST_CASE("trivial subspace is rejected") {
    auto model = make_double_well();
    const CriticalPoint top = classify_critical_point(*model, Vec::Zero(1));
    // Hilltop at c = 0: unstable dimension d - m = 0.
    EquilibriumSpectrum sp = spectrum_at(*model, top, 0.0);
    CHECK_THROWS_AS(LocalManifold::build(model, sp, ManifoldKind::unstable, {}),
                    InvalidInputError);
}
