#include "wavefront/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wavefront/errors.hpp"

namespace wavefront {

namespace {

Mat basis_for_kind(const EquilibriumSpectrum& sp, ManifoldKind kind) {
    switch (kind) {
        case ManifoldKind::unstable:
            return sp.unstable_basis;
        case ManifoldKind::stable:
            return sp.stable_basis;
        case ManifoldKind::strong_unstable:
        case ManifoldKind::strong_stable:
            if (!sp.strong_splitting_available)
                throw InvalidInputError("strong splitting unavailable: " +
                                        sp.strong_splitting_note);
            return kind == ManifoldKind::strong_unstable ? sp.strong_unstable_basis
                                                         : sp.strong_stable_basis;
    }
    throw InvalidInputError("unknown manifold kind");
}

std::vector<Vec> direction_samples(int n) {
    std::vector<Vec> dirs;
    for (int i = 0; i < n; ++i) {
        dirs.push_back(Vec::Unit(n, i));
        dirs.push_back(-Vec::Unit(n, i));
    }
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            dirs.push_back(s * (Vec::Unit(n, i) + Vec::Unit(n, j)));
            dirs.push_back(s * (Vec::Unit(n, i) - Vec::Unit(n, j)));
        }
    return dirs;
}

}  // namespace

double nonlinearity_ratio(const PotentialModel& model, const EquilibriumSpectrum& spectrum,
                          const Mat& tangent_basis, double radius) {
    const int d = model.dimension();
    const Vec& e = spectrum.equilibrium.point;
    const Mat hess = model.hessian(e);

    double worst = 0.0;
    for (const Vec& beta : direction_samples(static_cast<int>(tangent_basis.cols()))) {
        const Vec offset = radius * (tangent_basis * beta);
        const Vec du = offset.head(d);
        const Vec linear = hess * du;
        const double denom = linear.norm();
        if (denom < 1e-300) continue;
        const double num = (model.gradient(e + du) - linear).norm();
        worst = std::max(worst, num / denom);
    }
    return worst;
}

double suggest_radius(const PotentialModel& model, const EquilibriumSpectrum& spectrum,
                      const Mat& tangent_basis, double budget) {
    double lo = 1e-8;
    if (nonlinearity_ratio(model, spectrum, tangent_basis, lo) > budget)
        throw RadiusError("nonlinearity budget unattainable even at radius 1e-8", 0.0);
    double hi = lo;
    while (hi < 1e2 && nonlinearity_ratio(model, spectrum, tangent_basis, 2.0 * hi) <= budget)
        hi *= 2.0;
    if (hi >= 1e2) return hi;
    double bad = 2.0 * hi;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (hi + bad);
        if (nonlinearity_ratio(model, spectrum, tangent_basis, mid) <= budget)
            hi = mid;
        else
            bad = mid;
    }
    return hi;
}

LocalManifold LocalManifold::build(std::shared_ptr<const PotentialModel> model,
                                   const EquilibriumSpectrum& spectrum, ManifoldKind kind,
                                   const ManifoldOptions& options) {
    Mat basis = basis_for_kind(spectrum, kind);
    if (basis.cols() == 0)
        throw InvalidInputError("requested manifold has trivial tangent subspace");
    basis = orthonormal_basis(basis);

    LocalManifold m;
    m.model_ = std::move(model);
    m.spectrum_ = spectrum;
    m.kind_ = kind;
    m.order_ = options.order;
    m.kappa_ = options.kappa;
    m.integrator_tol_ = options.integrator_tol;
    m.basis_ = basis;

    if (options.radius > 0.0) {
        const double ratio = nonlinearity_ratio(*m.model_, spectrum, basis, options.radius);
        if (ratio > options.nonlinearity_budget) {
            const double ok = suggest_radius(*m.model_, spectrum, basis,
                                             options.nonlinearity_budget);
            throw RadiusError("manifold radius violates the nonlinearity budget", ok);
        }
        m.radius_ = options.radius;
    } else {
        m.radius_ = suggest_radius(*m.model_, spectrum, basis, options.nonlinearity_budget);
    }
    return m;
}

PhasePoint LocalManifold::sample_boundary(const Vec& b) const {
    return sample_at_radius(b, radius_);
}

PhasePoint LocalManifold::sample_at_radius(const Vec& b, double rho) const {
    if (b.size() != basis_.cols())
        throw InvalidInputError("sample_at_radius: tangent coordinate dimension mismatch");
    if (!(rho > 0.0) || rho > radius_ * (1.0 + 1e-12))
        throw InvalidInputError("sample_at_radius: rho must lie in (0, radius]");
    const double norm = b.norm();
    if (norm < 1e-300) throw InvalidInputError("sample_at_radius: zero direction");
    const Vec unit = b / norm;
    const Vec E = equilibrium_state();

    if (order_ == ManifoldOrder::linear) return unpack(E + rho * (basis_ * unit));

    // Refined: seed on the tangent plane at radius rho/kappa, transport with
    // the flow until the offset reaches rho.
    const Vec seed = E + (rho / kappa_) * (basis_ * unit);
    const bool forward = !contracts_forward();  // expanding direction

    EventSpec exit;
    exit.kind = EventKind::ball_exit;
    exit.center = E;
    exit.radius = rho;
    exit.terminal = true;

    IntegrationOptions opt;
    opt.tol = integrator_tol_;
    // Deep interior samples live far below unit scale; tie the absolute
    // floor of the error control to the seed size.
    opt.abs_tol = std::max(1e-300, 1e-2 * integrator_tol_ * rho / kappa_);
    const double rate = std::min(std::abs(spectrum_.beta_u > 0 ? spectrum_.beta_u : 1.0),
                                 std::abs(spectrum_.beta_s < 0 ? spectrum_.beta_s : -1.0));
    const double horizon = 4.0 * (std::log(kappa_) + 2.0) / std::max(rate, 1e-3);

    IntegrationResult res = integrate(*model_, spectrum_.speed, unpack(seed), 0.0,
                                      forward ? horizon : -horizon, opt, {&exit, 1});
    if (res.events.empty())
        throw Error("sample_at_radius: flow did not reach the requested radius");
    return res.events.front().state;
}

double LocalManifold::distance_to(const PhasePoint& U) const {
    const Vec E = equilibrium_state();
    const Vec offset = pack(U) - E;
    Vec beta = basis_.transpose() * offset;
    const double rho = beta.norm();
    if (rho < 1e-300) return offset.norm();

    Vec sheet;
    if (order_ == ManifoldOrder::linear || rho >= radius_) {
        sheet = E + basis_ * beta;
    } else {
        sheet = pack(sample_at_radius(beta, rho));
    }
    return (pack(U) - sheet).norm();
}

LocalManifold::Membership LocalManifold::membership_test(const PhasePoint& U,
                                                         double window) const {
    const Vec E = equilibrium_state();
    const double initial = (pack(U) - E).norm();

    IntegrationOptions opt;
    opt.tol = integrator_tol_;
    const double direction = contracts_forward() ? window : -window;
    Membership out;

    IntegrationResult res;
    try {
        res = integrate(*model_, spectrum_.speed, U, 0.0, direction, opt);
    } catch (const EscapeError&) {
        out.member = false;
        out.terminal_distance = std::numeric_limits<double>::infinity();
        return out;
    }

    const auto& samples = res.trajectory.curve.samples();
    double sup = 0.0;
    for (const auto& s : samples) sup = std::max(sup, (s.y - E).norm());
    // Curves are stored with ascending xi; after backward integration the
    // terminal state sits at the front.
    const double terminal = contracts_forward() ? (samples.back().y - E).norm()
                                                : (samples.front().y - E).norm();

    // Log-slope of the offset in true xi, fitted over the half of the window
    // nearest the equilibrium.
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        const double dist = (s.y - E).norm();
        if (dist > 1e-300) {
            xs.push_back(s.xi);
            ys.push_back(std::log(dist));
        }
    }
    double slope = 0.0;
    if (xs.size() >= 4) {
        const std::size_t half = xs.size() / 2;
        const std::size_t from = contracts_forward() ? half : 0;
        const std::size_t to = contracts_forward() ? xs.size() : half;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(to - from);
        for (std::size_t i = from; i < to; ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        const double denom = n * sxx - sx * sx;
        if (std::abs(denom) > 1e-300) slope = (n * sxy - sx * sy) / denom;
    }
    out.fitted_rate = slope;
    out.terminal_distance = terminal;

    const bool stays = sup <= 2.0 * radius_ + 1e-12;
    const bool approaches = terminal <= std::max(0.5 * initial, 1e-13);
    out.member = stays && approaches;

    if (out.member &&
        (kind_ == ManifoldKind::strong_stable || kind_ == ManifoldKind::strong_unstable)) {
        const double mild = kind_ == ManifoldKind::strong_stable
                                ? spectrum_.lambda_minus[0].real()
                                : spectrum_.lambda_plus[0].real();
        const double strong = kind_ == ManifoldKind::strong_stable ? spectrum_.beta_ss
                                                                   : spectrum_.beta_su;
        const double threshold = 0.5 * (mild + strong);
        out.member = kind_ == ManifoldKind::strong_stable ? slope <= threshold
                                                          : slope >= threshold;
    }
    return out;
}

}  // namespace wavefront
