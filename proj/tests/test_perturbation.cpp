#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wavefront/perturbation.hpp"

using namespace wavefront;
using namespace wavefront::testing;

namespace {

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

void check_derivatives_by_fd(const PotentialModel& w, const Vec& u, double tol) {
    const double h = 1e-6;
    const int d = w.dimension();
    const Vec g = w.gradient(u);
    const Mat hess = w.hessian(u);
    for (int i = 0; i < d; ++i) {
        Vec up = u, dn = u;
        up(i) += h;
        dn(i) -= h;
        const double fd = (w.value(up) - w.value(dn)) / (2.0 * h);
        CHECK(std::abs(fd - g(i)) < tol);
        const Vec fdh = (w.gradient(up) - w.gradient(dn)) / (2.0 * h);
        CHECK((fdh - hess.col(i)).norm() < tol * 10.0);
    }
}

}  // namespace

TEST_CASE("bump profile: shape and bounds") {
    CHECK(bump_profile(0.0) == doctest::Approx(1.0));
    CHECK(bump_profile(1.0) == 0.0);
    CHECK(bump_profile(-1.0) == 0.0);
    CHECK(bump_profile(2.5) == 0.0);
    for (double r = -0.95; r < 1.0; r += 0.13) {
        CHECK(bump_profile(r) > 0.0);
        CHECK(bump_profile(r) <= 1.0);
        CHECK(bump_profile(r) == bump_profile(-r));  // even
    }
}

TEST_CASE("case1 bump: value, gradient and support") {
    const Vec center = v2(0.5, -0.2);
    const Vec dir = v2(1.0, 0.0);
    const double eps = 0.3;
    auto w = case1_bump(center, eps, dir);

    CHECK(w->value(center) == 0.0);
    CHECK((w->gradient(center) - dir).norm() < 1e-12);

    // Support confinement is bit-exact.
    CHECK(w->value(v2(0.5 + eps, -0.2)) == 0.0);
    CHECK(w->value(v2(3.0, 3.0)) == 0.0);
    CHECK(w->gradient(v2(3.0, 3.0)).norm() == 0.0);
    CHECK(w->hessian(v2(3.0, 3.0)).norm() == 0.0);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    for (int k = 0; k < 30; ++k)
        check_derivatives_by_fd(*w, center + v2(uni(rng) * eps, uni(rng) * eps), 1e-5);
}

TEST_CASE("case1 bump: gradient scale is O(1/eps)") {
    const Vec center = Vec::Zero(2);
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        auto w = case2_bump(center, eps);
        double max_grad = 0.0;
        for (double r = 0.02; r < 1.0; r += 0.02)
            max_grad = std::max(max_grad,
                                w->gradient(v2(r * eps, 0.0)).norm());
        CHECK(max_grad > 0.5 / eps);
        CHECK(max_grad < 4.0 / eps);
    }
}

TEST_CASE("case1 bump: orthogonal direction on a straight trace") {
    // Along a line through the center aligned with axis 1, a case-1 bump in
    // the orthogonal direction has gradient rho_eps * e2 exactly.
    const Vec center = v2(0.0, 0.0);
    const Vec dir = v2(0.0, 1.0);
    const double eps = 0.4;
    auto w = case1_bump(center, eps, dir);
    for (double t = -0.39; t < 0.4; t += 0.07) {
        const Vec u = v2(t, 0.0);
        const Vec g = w->gradient(u);
        const double rho = bump_profile(std::abs(t) / eps);
        CHECK(std::abs(g(0)) < 1e-14);
        CHECK(g(1) == doctest::Approx(rho).epsilon(1e-12));
    }
}

TEST_CASE("case2 bump: unit maximum and flat top") {
    const Vec center = v2(-1.0, 2.0);
    auto w = case2_bump(center, 0.25);
    CHECK(w->value(center) == doctest::Approx(1.0));
    CHECK(w->gradient(center).norm() < 1e-12);
    CHECK(w->value(v2(-1.0 + 0.25, 2.0)) == 0.0);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(-0.3, 0.3);
    for (int k = 0; k < 30; ++k)
        check_derivatives_by_fd(*w, center + v2(uni(rng), uni(rng)), 1e-5);
}

TEST_CASE("smallest_eigenvalue_splitter: isotropic minimum becomes anisotropic") {
    auto base = make_quadratic(2);
    CriticalPoint minimum = classify_critical_point(*base, Vec::Zero(2));
    auto split = smallest_eigenvalue_splitter(base, minimum, 0.1, 0.5);

    // e is still a critical point.
    CHECK(split->gradient(Vec::Zero(2)).norm() <= 1e-12);
    CriticalPoint after = classify_critical_point(*split, Vec::Zero(2));
    CHECK(after.morse_index == 0);
    CHECK(after.hessian_eigenvalues(0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(after.hessian_eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-12));

    // Unchanged outside the delta ball, bit-exact.
    CHECK(split->value(v2(0.8, 0.0)) == base->value(v2(0.8, 0.0)));
    CHECK(split->value(v2(0.0, 3.0)) == base->value(v2(0.0, 3.0)));

    // Analytic derivatives of the splitter term agree with differences.
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> uni(-0.45, 0.45);
    for (int k = 0; k < 20; ++k) check_derivatives_by_fd(*split, v2(uni(rng), uni(rng)), 1e-5);
}

TEST_CASE("smallest_eigenvalue_splitter: guards") {
    auto base = make_quadratic(2);
    CriticalPoint minimum = classify_critical_point(*base, Vec::Zero(2));
    CHECK(smallest_eigenvalue_splitter(base, minimum, 0.0, 0.5) == base);
    CHECK_THROWS_AS(smallest_eigenvalue_splitter(base, minimum, 1.0, 0.5), InvalidInputError);
    CHECK_THROWS_AS(smallest_eigenvalue_splitter(base, minimum, 1.5, 0.5), InvalidInputError);
}

namespace {

constexpr double kNagumoA = 0.25;

FrontProblem nagumo_problem() {
    FrontProblem p;
    p.model = make_nagumo(kNagumoA);
    SearchBox box{Vec::Constant(1, -0.5), Vec::Constant(1, 1.5)};
    CriticalPointSearch search = find_critical_points(*p.model, box, 8);
    REQUIRE(search.points.size() == 3);
    p.departure = search.points[2];
    p.arrival = search.points[0];
    p.c_min = 0.05;
    p.c_max = 1.0;
    return p;
}

}  // namespace

TEST_CASE("case2 integration-by-parts identity along the pulse") {
    // With psi = alpha(xi) u' (automatic in d = 1), the Melnikov integral of
    // a localized W reduces to -int alpha' W(u(xi)) dxi.
    auto model = make_fish();
    CriticalPoint e = classify_critical_point(*model, Vec::Zero(1));
    ConnectionSolution sol = solve_symmetric_pulse(model, e);
    const double xi1 = 1.6 * sol.turning_time;
    AdjointSolution adj = adjoint_integrate(*model, sol.trajectory, Vec::Constant(1, 0.7),
                                            Vec::Constant(1, -0.4), xi1, 0.0);
    auto w = case2_bump(Vec::Constant(1, 1.0), 0.12);

    const double lhs = melnikov_sensitivity(*w, sol.trajectory, adj, 0.0, xi1);

    // Right-hand side: -int alpha'(xi) W(u(xi)) dxi by midpoint quadrature
    // with alpha differentiated numerically.
    const int n = 4000;
    double rhs = 0.0;
    const double h = xi1 / n;
    for (int i = 0; i < n; ++i) {
        const double xi = (i + 0.5) * h;
        const double dh = 1e-5;
        auto alpha_at = [&](double x) {
            const Vec udot = sol.trajectory.at(x).v;
            return adj.psi(x).dot(udot) / udot.squaredNorm();
        };
        const double dalpha = (alpha_at(xi + dh) - alpha_at(xi - dh)) / (2.0 * dh);
        rhs -= h * dalpha * w->value(sol.trajectory.at(xi).u);
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
}

TEST_CASE("robustness_experiment: zero amplitude reproduces the solution") {
    FrontProblem problem = nagumo_problem();
    ConnectionSolution sol = solve_front(problem);
    auto bump = case1_bump(Vec::Constant(1, 0.5), 0.2, Vec::Constant(1, 1.0));
    std::vector<double> ladder = {0.0};
    RobustnessReport rep = robustness_experiment(problem, sol, bump, ladder);
    REQUIRE(rep.rungs.size() == 1);
    CHECK(rep.rungs[0].converged);
    CHECK(std::abs(rep.rungs[0].delta_c) < 1e-10);
    CHECK(rep.rungs[0].profile_drift < 1e-7);
}

TEST_CASE("robustness_experiment: off-trace bump does not move the front") {
    FrontProblem problem = nagumo_problem();
    ConnectionSolution sol = solve_front(problem);
    // Position trace is [0, 1]; support of this bump is [1.6, 2.0].
    auto bump = case2_bump(Vec::Constant(1, 1.8), 0.2);
    std::vector<double> ladder = {1e-4, 1e-3};
    RobustnessReport rep = robustness_experiment(problem, sol, bump, ladder);
    for (const auto& rung : rep.rungs) {
        CHECK(rung.converged);
        CHECK(std::abs(rung.delta_c) < 1e-9);
        CHECK(rung.profile_drift < 1e-6);
    }
    CHECK(std::abs(rep.dc_damp_predicted) < 1e-9);
}

TEST_CASE("robustness_experiment: on-trace bump drift matches the adjoint prediction") {
    FrontProblem problem = nagumo_problem();
    ConnectionSolution sol = solve_front(problem);
    auto bump = case1_bump(Vec::Constant(1, 0.5), 0.2, Vec::Constant(1, 1.0));
    std::vector<double> ladder = {1e-5, 3e-5, 1e-4};
    RobustnessReport rep = robustness_experiment(problem, sol, bump, ladder);
    for (const auto& rung : rep.rungs) CHECK(rung.converged);
    CHECK(rep.dc_damp_fit ==
          doctest::Approx(rep.dc_damp_predicted).epsilon(0.05));
}
