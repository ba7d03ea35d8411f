#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "wavefront/shooting.hpp"

using namespace wavefront;
using namespace wavefront::testing;

namespace {

constexpr double kNagumoA = 0.25;
const double kNagumoSpeed = std::sqrt(2.0) * (0.5 - kNagumoA);  // = sqrt(2)/4

double nagumo_profile(double xi) { return 1.0 / (1.0 + std::exp(xi / std::sqrt(2.0))); }

double fish_pulse(double xi) {
    const double s = 1.0 / std::cosh(xi / 2.0);
    return 1.5 * s * s;
}

FrontProblem nagumo_problem() {
    FrontProblem p;
    p.model = make_nagumo(kNagumoA);
    SearchBox box{Vec::Constant(1, -0.5), Vec::Constant(1, 1.5)};
    CriticalPointSearch search = find_critical_points(*p.model, box, 8);
    REQUIRE(search.points.size() == 3);
    p.departure = search.points[2];  // e_- = 1
    p.arrival = search.points[0];    // e_+ = 0
    p.c_min = 0.05;
    p.c_max = 1.0;
    return p;
}

CriticalPoint origin_of(const PotentialModel& model) {
    return classify_critical_point(model, Vec::Zero(model.dimension()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Oracles are validated before any solver output is asserted against them.

TEST_CASE("oracle: the closed-form Nagumo front satisfies the profile equation") {
    auto model = make_nagumo(kNagumoA);
    const double c = kNagumoSpeed;
    for (double xi = -12.0; xi <= 12.0; xi += 0.375) {
        const double u = nagumo_profile(xi);
        // u' = -(1/sqrt 2) u (1 - u); u'' follows by differentiating again.
        const double du = -(1.0 / std::sqrt(2.0)) * u * (1.0 - u);
        const double ddu = -(1.0 / std::sqrt(2.0)) * du * (1.0 - 2.0 * u);
        const double rhs = -c * du + model->gradient(Vec::Constant(1, u))(0);
        CHECK(std::abs(ddu - rhs) < 1e-12);
    }
}

TEST_CASE("oracle: the sech^2 pulse satisfies u'' = u - u^2 with zero energy") {
    auto model = make_fish();
    for (double xi = -10.0; xi <= 10.0; xi += 0.25) {
        const double u = fish_pulse(xi);
        const double s = 1.0 / std::cosh(xi / 2.0);
        const double t = std::tanh(xi / 2.0);
        const double du = -1.5 * s * s * t;
        const double ddu = 1.5 * s * s * (t * t - 0.5 * s * s);
        CHECK(std::abs(ddu - (u - u * u)) < 1e-12);
        // Hamiltonian of the exact orbit is zero.
        const double h = 0.5 * du * du - model->value(Vec::Constant(1, u));
        CHECK(std::abs(h) < 1e-12);
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("solve_front: Nagumo speed and profile") {
    FrontProblem problem = nagumo_problem();
    ConnectionSolution sol = solve_front(problem);

    CHECK(std::abs(sol.c - kNagumoSpeed) <= 1e-4);
    CHECK(sol.mismatch_norm <= 1e-9 * (1.0 + problem.arrival.point.norm()));
    CHECK(sol.kind == ConnectionKind::front);

    // Shift alignment at the half-height crossing (closed form crosses 1/2
    // at xi = 0), then pointwise comparison.
    const auto& curve = sol.trajectory.curve;
    double shift = 0.0;
    {
        double lo = curve.front_xi(), hi = curve.back_xi();
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (curve.at(mid)(0) > 0.5 ? lo : hi) = mid;
        }
        shift = 0.5 * (lo + hi);
    }
    double worst = 0.0;
    for (double xi = -10.0; xi <= 10.0; xi += 0.1) {
        if (xi + shift < curve.front_xi() || xi + shift > curve.back_xi()) continue;
        worst = std::max(worst, std::abs(curve.at(xi + shift)(0) - nagumo_profile(xi)));
    }
    CHECK(worst <= 1e-3);

    // Potential lag identity: V(e_-) - V(e_+) = -c int |u'|^2.
    const double lag = problem.departure.value - problem.arrival.value;
    const double kinetic = kinetic_integral(sol.trajectory);
    CHECK(std::abs(lag + sol.c * kinetic) <= 1e-6 * std::abs(lag));

    // Derivative decay at both ends.
    const auto& samples = curve.samples();
    CHECK(samples.front().y.tail(1).norm() <= 1e-6);
    CHECK(samples.back().y.tail(1).norm() <= 1e-6);

    // Endpoint memberships.
    EquilibriumSpectrum spu = spectrum_at(*problem.model, problem.departure, sol.c);
    EquilibriumSpectrum sps = spectrum_at(*problem.model, problem.arrival, sol.c);
    ManifoldOptions mo;
    mo.radius = sol.r_unstable;
    mo.nonlinearity_budget = 1.0;
    LocalManifold wu = LocalManifold::build(problem.model, spu, ManifoldKind::unstable, mo);
    mo.radius = sol.r_stable;
    LocalManifold ws = LocalManifold::build(problem.model, sps, ManifoldKind::stable, mo);
    CHECK(wu.membership_test(sol.trajectory.at(0.0), 5.0).member);
    CHECK(ws.membership_test(sol.trajectory.at(sol.flight_time), 5.0).member);
}

TEST_CASE("mismatch_front: zero at the solution, nonzero at xi = 0") {
    FrontProblem problem = nagumo_problem();
    ConnectionSolution sol = solve_front(problem);
    const Vec at_solution =
        mismatch_front(problem, sol.b_unstable, sol.b_stable, sol.flight_time, sol.c);
    CHECK(at_solution.norm() <= 1e-8);

    // xi = 0: disjoint local-manifold projections force a gap. The spheres
    // sit near the two distinct equilibria, so |mismatch| is order |e_- - e_+|.
    const Vec immediate = mismatch_front(problem, sol.b_unstable, sol.b_stable, 0.0, sol.c);
    CHECK(immediate.norm() > 0.5);
}

TEST_CASE("solve_front: infeasible configurations") {
    auto dw = make_double_well();
    SearchBox box{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0)};
    CriticalPointSearch search = find_critical_points(*dw, box, 8);
    REQUIRE(search.points.size() == 3);

    FrontProblem same;
    same.model = dw;
    same.departure = search.points[0];
    same.arrival = search.points[0];
    same.c_min = 0.1;
    same.c_max = 1.0;
    CHECK_THROWS_AS(solve_front(same), InfeasibleError);

    FrontProblem equal_levels;
    equal_levels.model = dw;
    equal_levels.departure = search.points[0];  // V(-1) = 0
    equal_levels.arrival = search.points[2];    // V(+1) = 0
    equal_levels.c_min = 0.1;
    equal_levels.c_max = 1.0;
    CHECK_THROWS_AS(solve_front(equal_levels), InfeasibleError);
}

TEST_CASE("scan_speed: one sign change bracketing the Nagumo speed") {
    FrontProblem problem = nagumo_problem();
    std::vector<double> grid;
    for (double c = 0.1; c <= 0.6 + 1e-12; c += 0.05) grid.push_back(c);
    auto rows = scan_speed(problem, grid);
    REQUIRE(rows.size() == grid.size());
    int changes = 0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if ((rows[i].second < 0.0) != (rows[i + 1].second < 0.0)) {
            ++changes;
            bracket_lo = rows[i].first;
            bracket_hi = rows[i + 1].first;
        }
    }
    CHECK(changes == 1);
    CHECK(bracket_lo < kNagumoSpeed);
    CHECK(bracket_hi > kNagumoSpeed);
}

TEST_CASE("solve_front: interval without a bracket") {
    FrontProblem problem = nagumo_problem();
    problem.c_min = 0.5;  // entirely above the front speed
    problem.c_max = 0.9;
    CHECK_THROWS_AS(solve_front(problem), NoBracketError);
}

TEST_CASE("scan_speed: no sign change above the front speed, empty grid") {
    FrontProblem problem = nagumo_problem();
    std::vector<double> high;
    for (double c = 0.45; c <= 0.9; c += 0.05) high.push_back(c);
    auto rows = scan_speed(problem, high);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        CHECK((rows[i].second < 0.0) == (rows[i + 1].second < 0.0));

    CHECK(scan_speed(problem, std::vector<double>{}).empty());
}

TEST_CASE("solve_symmetric_pulse: the sech^2 orbit") {
    auto model = make_fish();
    ConnectionSolution sol = solve_symmetric_pulse(model, origin_of(*model));

    CHECK(sol.kind == ConnectionKind::symmetric_pulse);
    CHECK(sol.symmetric_flag);
    const Vec turn = pack(sol.trajectory.at(sol.turning_time));
    CHECK(std::abs(turn(0) - 1.5) <= 1e-6);
    CHECK(std::abs(turn(1)) <= 1e-9);

    // Hamiltonian of the orbit: 0 to high accuracy.
    CHECK(std::abs(hamiltonian(*model, sol.trajectory.at(0.0))) <= 1e-8);

    // Reflected symmetry across the turning time on the through-integrated
    // span (tails past the boundary ride the saddle and are excluded).
    double worst = 0.0;
    const double half = sol.turning_time;
    for (double s = 0.0; s <= half; s += half / 64.0) {
        const Vec a = sol.trajectory.curve.at(sol.turning_time - s);
        const Vec b = sol.trajectory.curve.at(sol.turning_time + s);
        worst = std::max(worst, std::abs(a(0) - b(0)));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("solve_symmetric_pulse: no homoclinic for the linear potential") {
    auto model = make_quadratic(1);
    CHECK_THROWS_AS(solve_symmetric_pulse(model, origin_of(*model)),
                    Error);  // NoConvergence or ReturnsToEquilibrium
}

TEST_CASE("solve_asymmetric_pulse: d = 1 converges and is flagged symmetric") {
    auto model = make_fish();
    ConnectionSolution sol = solve_asymmetric_pulse(model, origin_of(*model));
    CHECK(sol.converged_to_symmetric);
    CHECK(std::abs(hamiltonian(*model, sol.trajectory.at(0.5)) - (-0.0)) <= 1e-8);
    CHECK(sol.mismatch_norm <= 1e-9 * (1.0 + 1.0));
}

TEST_CASE("solve_asymmetric_pulse: warm start from the symmetric orbit") {
    auto model = make_fish();
    ConnectionSolution sym = solve_symmetric_pulse(model, origin_of(*model));
    ShootingSeeds seeds;
    seeds.b_unstable = sym.b_unstable;
    seeds.flight_time = 2.0 * sym.turning_time;
    ConnectionSolution sol = solve_asymmetric_pulse(model, origin_of(*model), {}, seeds);
    CHECK(sol.mismatch_norm <= 1e-9 * 2.0);
    CHECK(sol.converged_to_symmetric);
}

TEST_CASE("check_standing_front_obstruction") {
    // Tilted double well: unequal depths.
    auto tilted = poly1({{4, 0.25}, {2, -0.5}, {1, 0.1}});
    SearchBox box{Vec::Constant(1, -2.0), Vec::Constant(1, 2.0)};
    CriticalPointSearch search = find_critical_points(*tilted, box, 10);
    REQUIRE(search.points.size() == 3);
    const CriticalPoint& left = search.points[0];
    const CriticalPoint& right = search.points[2];
    CHECK(left.morse_index == 0);
    CHECK(right.morse_index == 0);
    CHECK(check_standing_front_obstruction(*tilted, left, right) ==
          ObstructionVerdict::Obstructed);

    auto dw = make_double_well();
    CriticalPointSearch sym = find_critical_points(*dw, box, 10);
    CHECK(check_standing_front_obstruction(*dw, sym.points[0], sym.points[2]) ==
          ObstructionVerdict::PossiblyConnectable);

    CHECK_THROWS_AS(check_standing_front_obstruction(*dw, sym.points[0], sym.points[0]),
                    InvalidInputError);
}

TEST_CASE("solve_front in d = 2: separable Nagumo channel") {
    // V(u1, u2) = V_nagumo(u1) + u2^2/2: the scalar front embeds with the
    // same speed, and the solver works through the general LM path.
    std::vector<Monomial> m;
    m.push_back({{4, 0}, 0.25});
    m.push_back({{3, 0}, -(1.0 + kNagumoA) / 3.0});
    m.push_back({{2, 0}, kNagumoA / 2.0});
    m.push_back({{0, 2}, 0.5});
    auto model = std::make_shared<PolynomialPotential>(2, std::move(m));

    FrontProblem problem;
    problem.model = model;
    problem.departure = classify_critical_point(*model, (Vec(2) << 1.0, 0.0).finished());
    problem.arrival = classify_critical_point(*model, Vec::Zero(2));
    problem.c_min = 0.05;
    problem.c_max = 1.0;

    ConnectionSolution sol = solve_front(problem);
    CHECK(std::abs(sol.c - kNagumoSpeed) <= 1e-4);
    CHECK(sol.mismatch_norm <= 1e-9 * 2.0);

    // The u2 component stays numerically dead.
    for (const auto& s : sol.trajectory.curve.samples()) CHECK(std::abs(s.y(1)) < 1e-6);

    // Values reached only once near the departure end: |u - e_-| strictly
    // increasing over the initial stretch of the orbit.
    const Vec e_minus = problem.departure.point;
    const auto& samples = sol.trajectory.curve.samples();
    double prev = -1.0;
    for (const auto& s : samples) {
        const double dist = (s.y.head(2) - e_minus).norm();
        if (dist > 0.3) break;
        CHECK(dist > prev);
        prev = dist;
    }
}

TEST_CASE("solve_symmetric_pulse in d = 2: separable channel") {
    // V(u1, u2) = u1^2/2 - u1^3/3 + 2 u2^2: the scalar pulse embeds on the
    // channel floor; the solver works through the planar unknowns
    // (one sphere coordinate + the turning time).
    std::vector<Monomial> m;
    m.push_back({{2, 0}, 0.5});
    m.push_back({{3, 0}, -1.0 / 3.0});
    m.push_back({{0, 2}, 2.0});
    auto model = std::make_shared<PolynomialPotential>(2, std::move(m));
    CriticalPoint e = classify_critical_point(*model, Vec::Zero(2));
    REQUIRE(e.morse_index == 0);

    ConnectionSolution sol = solve_symmetric_pulse(model, e);
    const PhasePoint turn = sol.trajectory.at(sol.turning_time);
    CHECK(std::abs(turn.u(0) - 1.5) <= 1e-6);
    CHECK(std::abs(turn.u(1)) <= 1e-8);
    CHECK(turn.v.norm() <= 1e-8);
    CHECK(std::abs(hamiltonian(*model, sol.trajectory.at(0.0))) <= 1e-8);
}

TEST_CASE("solve_asymmetric_pulse in d = 2: level-set solve on the channel") {
    std::vector<Monomial> m;
    m.push_back({{2, 0}, 0.5});
    m.push_back({{3, 0}, -1.0 / 3.0});
    m.push_back({{0, 2}, 2.0});
    auto model = std::make_shared<PolynomialPotential>(2, std::move(m));
    CriticalPoint e = classify_critical_point(*model, Vec::Zero(2));

    ConnectionSolution sym = solve_symmetric_pulse(model, e);
    ShootingSeeds seeds;
    seeds.b_unstable = sym.b_unstable;
    seeds.flight_time = 2.0 * sym.turning_time;
    ConnectionSolution sol = solve_asymmetric_pulse(model, e, {}, seeds);

    CHECK(sol.mismatch_norm <= 1e-9 * 2.0);
    CHECK(sol.converged_to_symmetric);  // scalar-type channel orbit stays symmetric
    CHECK(std::abs(hamiltonian(*model, sol.trajectory.at(0.3))) <= 1e-8);
    CHECK(sol.b_stable.size() == 2);
}

TEST_CASE("translation quotient: independent solves agree") {
    FrontProblem problem = nagumo_problem();
    ConnectionSolution a = solve_front(problem);

    ShootingSeeds nudged;
    nudged.c = a.c * 1.02;  // same basin, different seed
    ConnectionSolution b = solve_front(problem, {}, nudged);
    CHECK(std::abs(a.c - b.c) < 1e-8);
    CHECK(std::abs(a.flight_time - b.flight_time) < 1e-6);
    CHECK((a.b_unstable - b.b_unstable).norm() < 1e-10);
    CHECK((a.b_stable - b.b_stable).norm() < 1e-10);
}
