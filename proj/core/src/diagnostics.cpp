#include "wavefront/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "wavefront/errors.hpp"
#include "wavefront/parallel.hpp"

namespace wavefront {

namespace {

Mat sphere_chart(const Vec& b) {
    if (b.size() == 1) return Mat(1, 0);
    return orthonormal_complement(b.normalized());
}

Vec retract(const Vec& b, const Mat& chart, const Vec& t, double radius) {
    if (t.size() == 0) return b;
    Vec w = b + chart * t;
    return radius * w.normalized();
}

constexpr double kGaussX[5] = {0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                               0.953089922969332};
constexpr double kGaussW[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444,
                               0.239314335249683, 0.118463442528095};

}  // namespace

TransversalityReport assess_rank(const Mat& jacobian, int target_rank, ConnectionKind kind,
                                 double rank_tol) {
    TransversalityReport rep;
    rep.kind = kind;
    rep.jacobian = jacobian;
    rep.rows = static_cast<int>(jacobian.rows());
    rep.cols = static_cast<int>(jacobian.cols());
    rep.target_rank = target_rank;

    Eigen::JacobiSVD<Mat> svd(jacobian);
    rep.singular_values = svd.singularValues();
    const double top = rep.singular_values.size() > 0 ? rep.singular_values(0) : 0.0;
    rep.rank = 0;
    for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values(i) > rank_tol * top) ++rep.rank;
    rep.margin = target_rank <= rep.singular_values.size() && target_rank > 0
                     ? rep.singular_values(target_rank - 1)
                     : 0.0;

    const bool full = rep.rank >= target_rank;
    if (kind == ConnectionKind::symmetric_pulse)
        rep.verdict = full ? TransversalityVerdict::elementary
                           : TransversalityVerdict::non_elementary;
    else
        rep.verdict = full ? TransversalityVerdict::transverse : TransversalityVerdict::degenerate;
    return rep;
}

namespace {

// Rebuilds the manifold pair of a front solution at a given speed, with the
// radii recorded in the solution so boundary coordinates stay comparable.
struct FrontRebuild {
    LocalManifold wu, ws;
};

FrontRebuild rebuild_front_manifolds(const FrontProblem& problem,
                                     const ConnectionSolution& sol, double c,
                                     double integrator_tol) {
    EquilibriumSpectrum su = spectrum_at(*problem.model, problem.departure, c);
    EquilibriumSpectrum ss = spectrum_at(*problem.model, problem.arrival, c);
    ManifoldOptions mo;
    mo.integrator_tol = integrator_tol;
    mo.nonlinearity_budget = 1.0;  // radii were validated by the solve
    mo.radius = sol.r_unstable;
    LocalManifold wu = LocalManifold::build(problem.model, su, ManifoldKind::unstable, mo);
    mo.radius = sol.r_stable;
    LocalManifold ws = LocalManifold::build(problem.model, ss, ManifoldKind::stable, mo);
    return FrontRebuild{std::move(wu), std::move(ws)};
}

Vec flow_endpoint(const PotentialModel& model, double c, const PhasePoint& from, double xi,
                  double tol) {
    IntegrationOptions iopt;
    iopt.tol = tol;
    IntegrationResult res = integrate(model, c, from, 0.0, xi, iopt);
    return res.trajectory.curve.samples().back().y;
}

}  // namespace

TransversalityReport transversality_front(const FrontProblem& problem,
                                          const ConnectionSolution& solution,
                                          const DiagnosticsOptions& options) {
    if (solution.kind != ConnectionKind::front)
        throw InvalidInputError("transversality_front needs a front solution");
    const int d = problem.model->dimension();
    const double c = solution.c;
    const double xi = solution.flight_time;

    const Mat chart_u = sphere_chart(solution.b_unstable);
    const Mat chart_s = sphere_chart(solution.b_stable);
    const Eigen::Index nu = chart_u.cols(), ns = chart_s.cols();
    const Eigen::Index n_cols = nu + ns + 2;

    Mat jac(2 * d, n_cols);

    auto mismatch_at = [&](const Vec& b_u, const Vec& b_s, double speed) -> Vec {
        FrontRebuild rb = rebuild_front_manifolds(problem, solution, speed,
                                                  options.integrator_tol);
        const Vec end = flow_endpoint(*problem.model, speed, rb.wu.sample_boundary(b_u), xi,
                                      options.integrator_tol);
        return end - pack(rb.ws.sample_boundary(b_s));
    };

    // Columns are independent; evaluate them concurrently.
    std::vector<std::function<void()>> jobs;
    for (Eigen::Index j = 0; j < nu; ++j) {
        jobs.emplace_back([&, j]() {
            const double h = options.fd_step * solution.r_unstable;
            Vec t = Vec::Zero(nu);
            t(j) = h;
            const Vec bp = retract(solution.b_unstable, chart_u, t, solution.r_unstable);
            t(j) = -h;
            const Vec bm = retract(solution.b_unstable, chart_u, t, solution.r_unstable);
            jac.col(j) = (mismatch_at(bp, solution.b_stable, c) -
                          mismatch_at(bm, solution.b_stable, c)) /
                         (2.0 * h);
        });
    }
    for (Eigen::Index j = 0; j < ns; ++j) {
        jobs.emplace_back([&, j]() {
            const double h = options.fd_step * solution.r_stable;
            Vec t = Vec::Zero(ns);
            t(j) = h;
            const Vec bp = retract(solution.b_stable, chart_s, t, solution.r_stable);
            t(j) = -h;
            const Vec bm = retract(solution.b_stable, chart_s, t, solution.r_stable);
            jac.col(nu + j) = (mismatch_at(solution.b_unstable, bp, c) -
                               mismatch_at(solution.b_unstable, bm, c)) /
                              (2.0 * h);
        });
    }
    jobs.emplace_back([&]() {
        // d Phi^u / d xi is the vector field at the matching point.
        FrontRebuild rb =
            rebuild_front_manifolds(problem, solution, c, options.integrator_tol);
        const Vec end = flow_endpoint(*problem.model, c, rb.wu.sample_boundary(solution.b_unstable),
                                      xi, options.integrator_tol);
        jac.col(nu + ns) = pack(vector_field(*problem.model, c, unpack(end)));
    });
    jobs.emplace_back([&]() {
        const double h = options.fd_step * (1.0 + std::abs(c));
        jac.col(nu + ns + 1) =
            (mismatch_at(solution.b_unstable, solution.b_stable, c + h) -
             mismatch_at(solution.b_unstable, solution.b_stable, c - h)) /
            (2.0 * h);
    });
    parallel_for(jobs.size(), [&](std::size_t i) { jobs[i](); });

    TransversalityReport rep = assess_rank(jac, 2 * d, ConnectionKind::front, options.rank_tol);
    rep.details = "columns: b_u tangent, b_s tangent, xi (vector field), c (manifold rebuild)";
    return rep;
}

TransversalityReport elementarity_symmetric(std::shared_ptr<const PotentialModel> model,
                                            const ConnectionSolution& solution,
                                            const DiagnosticsOptions& options) {
    if (solution.kind != ConnectionKind::symmetric_pulse)
        throw InvalidInputError("elementarity_symmetric needs a symmetric pulse solution");
    const int d = model->dimension();

    EquilibriumSpectrum sp = spectrum_at(*model, solution.departure, 0.0);
    ManifoldOptions mo;
    mo.integrator_tol = options.integrator_tol;
    mo.nonlinearity_budget = 1.0;
    mo.radius = solution.r_unstable;
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, mo);

    const Mat chart = sphere_chart(solution.b_unstable);
    const Eigen::Index nu = chart.cols();
    Mat jac(d, nu + 1);

    auto endpoint_velocity = [&](const Vec& b_u) -> Vec {
        const Vec end = flow_endpoint(*model, 0.0, wu.sample_boundary(b_u),
                                      solution.turning_time, options.integrator_tol);
        return end.tail(d);
    };

    std::vector<std::function<void()>> jobs;
    for (Eigen::Index j = 0; j < nu; ++j) {
        jobs.emplace_back([&, j]() {
            const double h = options.fd_step * solution.r_unstable;
            Vec t = Vec::Zero(nu);
            t(j) = h;
            const Vec bp = retract(solution.b_unstable, chart, t, solution.r_unstable);
            t(j) = -h;
            const Vec bm = retract(solution.b_unstable, chart, t, solution.r_unstable);
            jac.col(j) = (endpoint_velocity(bp) - endpoint_velocity(bm)) / (2.0 * h);
        });
    }
    jobs.emplace_back([&]() {
        // xi-column: dv/dxi = grad V(u(xi_T)) at the turning point (c = 0).
        const Vec end = flow_endpoint(*model, 0.0, wu.sample_boundary(solution.b_unstable),
                                      solution.turning_time, options.integrator_tol);
        jac.col(nu) = model->gradient(end.head(d));
    });
    parallel_for(jobs.size(), [&](std::size_t i) { jobs[i](); });

    TransversalityReport rep =
        assess_rank(jac, d, ConnectionKind::symmetric_pulse, options.rank_tol);
    rep.details = "endpoint velocity map over (b_u, xi)";
    return rep;
}

TransversalityReport transversality_asymmetric(std::shared_ptr<const PotentialModel> model,
                                               const ConnectionSolution& solution,
                                               const DiagnosticsOptions& options) {
    if (solution.kind != ConnectionKind::asymmetric_pulse &&
        solution.kind != ConnectionKind::symmetric_pulse)
        throw InvalidInputError("transversality_asymmetric needs a standing pulse solution");
    const int d = model->dimension();

    EquilibriumSpectrum sp = spectrum_at(*model, solution.departure, 0.0);
    ManifoldOptions mo;
    mo.integrator_tol = options.integrator_tol;
    mo.nonlinearity_budget = 1.0;
    mo.radius = solution.r_unstable;
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, mo);
    mo.radius = solution.r_stable;
    LocalManifold ws = LocalManifold::build(model, sp, ManifoldKind::stable, mo);

    // Symmetric solutions carry no stable-boundary coordinate; reconstruct
    // the crossing of the stable boundary from the end of the orbit.
    Vec b_s = solution.b_stable;
    double xi_match = solution.flight_time;
    if (b_s.size() == 0) {
        xi_match = 2.0 * solution.turning_time;
        const Vec end = flow_endpoint(*model, 0.0, wu.sample_boundary(solution.b_unstable),
                                      xi_match, options.integrator_tol);
        Vec beta = ws.tangent_basis().transpose() * (end - ws.equilibrium_state());
        if (beta.norm() < 1e-300)
            throw InvalidInputError("cannot project the orbit end onto the stable boundary");
        b_s = beta * (solution.r_stable / beta.norm());
    }

    const Vec target = pack(ws.sample_boundary(b_s));
    Vec grad_h(2 * d);
    grad_h.head(d) = -model->gradient(target.head(d));
    grad_h.tail(d) = target.tail(d);
    const Mat level_basis = orthonormal_complement(grad_h);  // 2d x (2d-1)

    const Mat chart_u = sphere_chart(solution.b_unstable);
    const Mat chart_s = sphere_chart(b_s);
    const Eigen::Index nu = chart_u.cols(), ns = chart_s.cols();
    Mat jac(2 * d - 1, nu + ns + 1);

    auto phi_end = [&](const Vec& b_u) -> Vec {
        return flow_endpoint(*model, 0.0, wu.sample_boundary(b_u), xi_match,
                             options.integrator_tol);
    };

    std::vector<std::function<void()>> jobs;
    for (Eigen::Index j = 0; j < nu; ++j) {
        jobs.emplace_back([&, j]() {
            const double h = options.fd_step * solution.r_unstable;
            Vec t = Vec::Zero(nu);
            t(j) = h;
            const Vec bp = retract(solution.b_unstable, chart_u, t, solution.r_unstable);
            t(j) = -h;
            const Vec bm = retract(solution.b_unstable, chart_u, t, solution.r_unstable);
            jac.col(j) = level_basis.transpose() * ((phi_end(bp) - phi_end(bm)) / (2.0 * h));
        });
    }
    for (Eigen::Index j = 0; j < ns; ++j) {
        jobs.emplace_back([&, j]() {
            const double h = options.fd_step * solution.r_stable;
            Vec t = Vec::Zero(ns);
            t(j) = h;
            const Vec bp = retract(b_s, chart_s, t, solution.r_stable);
            t(j) = -h;
            const Vec bm = retract(b_s, chart_s, t, solution.r_stable);
            jac.col(nu + j) =
                level_basis.transpose() *
                ((pack(ws.sample_boundary(bm)) - pack(ws.sample_boundary(bp))) / (2.0 * h));
        });
    }
    jobs.emplace_back([&]() {
        const Vec end = phi_end(solution.b_unstable);
        jac.col(nu + ns) =
            level_basis.transpose() * pack(vector_field(*model, 0.0, unpack(end)));
    });
    parallel_for(jobs.size(), [&](std::size_t i) { jobs[i](); });

    TransversalityReport rep =
        assess_rank(jac, 2 * d - 1, ConnectionKind::asymmetric_pulse, options.rank_tol);
    rep.details = "level-set coordinates (projected off the Hamiltonian gradient)";
    if (solution.symmetric_flag || solution.min_symmetry_distance < 1e-6)
        rep.details += "; symmetric input: level-set transversality may legitimately fail";
    return rep;
}

AdjointSolution adjoint_integrate(const PotentialModel& model, const Trajectory& base,
                                  const Vec& phi_terminal, const Vec& psi_terminal,
                                  double xi_from, double xi_to,
                                  const DiagnosticsOptions& options) {
    const int d = model.dimension();
    if (phi_terminal.size() != d || psi_terminal.size() != d)
        throw InvalidInputError("adjoint terminal data dimension mismatch");
    const double lo = base.curve.front_xi(), hi = base.curve.back_xi();
    if (xi_from < lo - 1e-9 || xi_from > hi + 1e-9 || xi_to < lo - 1e-9 || xi_to > hi + 1e-9)
        throw InvalidInputError("adjoint span must lie inside the base trajectory");
    const double c = base.speed;

    OdeRhs rhs = [&model, &base, c, d, lo, hi](double xi, const Vec& y, Vec& dy) {
        const double xic = std::clamp(xi, lo, hi);
        const Vec u1 = base.curve.at(xic).head(d);
        dy.resize(2 * d);
        dy.head(d) = -model.hessian(u1) * y.tail(d);
        dy.tail(d) = -y.head(d) + c * y.tail(d);
    };

    Vec y1(2 * d);
    y1.head(d) = phi_terminal;
    y1.tail(d) = psi_terminal;

    OdeOptions oopt;
    oopt.rel_tol = options.integrator_tol;
    oopt.abs_tol = options.integrator_tol * 1e-2;
    oopt.blowup_norm = 1e30;  // linear system, no physical escape

    OdeResult res = integrate_ode(rhs, y1, xi_from, xi_to, oopt);
    AdjointSolution out;
    out.curve = std::move(res.curve);
    out.dimension = d;
    return out;
}

double adjoint_pairing(const AdjointSolution& adjoint, double xi, const Vec& delta_u,
                       const Vec& delta_v) {
    return adjoint.phi(xi).dot(delta_u) + adjoint.psi(xi).dot(delta_v);
}

double melnikov_sensitivity(const PotentialModel& perturbation, const Trajectory& base,
                            const AdjointSolution& adjoint, double xi0, double xi1) {
    const int d = adjoint.dimension;
    const double lo = std::max({xi0, base.curve.front_xi(), adjoint.curve.front_xi()});
    const double hi = std::min({xi1, base.curve.back_xi(), adjoint.curve.back_xi()});
    if (!(hi > lo)) throw InvalidInputError("melnikov_sensitivity: empty span");

    // Quadrature on the union of adjoint sample points within the span.
    std::vector<double> knots{lo};
    for (const auto& s : adjoint.curve.samples())
        if (s.xi > lo && s.xi < hi) knots.push_back(s.xi);
    knots.push_back(hi);

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double h = knots[i + 1] - knots[i];
        for (int k = 0; k < 5; ++k) {
            const double xi = knots[i] + kGaussX[k] * h;
            const Vec u1 = base.curve.at(xi).head(d);
            total += kGaussW[k] * h * perturbation.gradient(u1).dot(adjoint.psi(xi));
        }
    }
    return total;
}

Vec melnikov_state_derivative(const PotentialModel& model, const PotentialModel& perturbation,
                              const Trajectory& base, double xi0, double xi1,
                              const DiagnosticsOptions& options) {
    const int d = model.dimension();
    const double lo = base.curve.front_xi(), hi = base.curve.back_xi();

    OdeRhs rhs = [&, d](double xi, const Vec& y, Vec& dy) {
        const double xic = std::clamp(xi, lo, hi);
        const Vec u1 = base.curve.at(xic).head(d);
        dy.resize(2 * d);
        dy.head(d) = y.tail(d);
        dy.tail(d) = model.hessian(u1) * y.head(d) - base.speed * y.tail(d) +
                     perturbation.gradient(u1);
    };

    OdeOptions oopt;
    oopt.rel_tol = options.integrator_tol;
    oopt.abs_tol = options.integrator_tol * 1e-2;
    oopt.blowup_norm = 1e30;
    // The inhomogeneity is the only source term and may be compactly
    // supported; keep steps small enough that stages cannot straddle it.
    oopt.max_step = 0.1;

    OdeResult res = integrate_ode(rhs, Vec::Zero(2 * d), xi0, xi1, oopt);
    return xi1 >= xi0 ? res.curve.samples().back().y : res.curve.samples().front().y;
}

Vec front_parameter_sensitivity(const FrontProblem& problem, const ConnectionSolution& solution,
                                const PotentialModel& perturbation,
                                const DiagnosticsOptions& options) {
    TransversalityReport rep = transversality_front(problem, solution, options);
    const Vec m_w = melnikov_state_derivative(*problem.model, perturbation, solution.trajectory,
                                              0.0, solution.flight_time, options);
    // J dx + M_W = 0 at first order along the persisting connection.
    return rep.jacobian.colPivHouseholderQr().solve(-m_w);
}

TangencyReport tangency_check(const Trajectory& trajectory,
                              const EquilibriumSpectrum& end_spectrum, TrajectoryEnd end,
                              const TangencyOptions& options) {
    TangencyReport rep;
    const CriticalPoint& cp = end_spectrum.equilibrium;
    const int d = static_cast<int>(cp.point.size());

    if (cp.morse_index != 0) {
        rep.details = "end equilibrium is not a minimum";
        return rep;
    }
    if (d >= 2 && !(cp.hessian_eigenvalues(0) < cp.hessian_eigenvalues(1))) {
        rep.details = "smallest Hessian eigenvalue is not simple";
        return rep;
    }
    if (end_spectrum.lambda_minus[0].imag() != 0.0) {
        rep.details = "mild rates are complex (spiral approach)";
        return rep;
    }

    const double mild = end == TrajectoryEnd::right ? end_spectrum.lambda_minus[0].real()
                                                    : end_spectrum.lambda_plus[0].real();
    const double strong =
        d >= 2 ? (end == TrajectoryEnd::right ? end_spectrum.lambda_minus[1].real()
                                              : end_spectrum.lambda_plus[1].real())
               : 2.0 * mild;
    rep.expected_rate = mild;
    const double rate_tol =
        options.rate_tol > 0.0 ? options.rate_tol : 0.25 * std::abs(strong - mild);

    // Walk toward the end and collect |u - e| while it decreases.
    const auto& samples = trajectory.curve.samples();
    std::vector<std::pair<double, double>> walk;  // (xi, r), ordered toward the end
    if (end == TrajectoryEnd::right)
        for (const auto& s : samples) walk.emplace_back(s.xi, (s.y.head(d) - cp.point).norm());
    else
        for (auto it = samples.rbegin(); it != samples.rend(); ++it)
            walk.emplace_back(it->xi, (it->y.head(d) - cp.point).norm());

    // Find the minimum of r over the approach; samples past it (the rebound)
    // sit at the integrator noise floor and are excluded.
    std::size_t argmin = 0;
    double rmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < walk.size(); ++i)
        if (walk[i].second < rmin) {
            rmin = walk[i].second;
            argmin = i;
        }
    const double floor =
        rmin > options.window_lo ? std::max(options.window_lo, 20.0 * rmin) : options.window_lo;

    std::vector<double> xs, ys;
    double deepest_xi = walk[argmin].first;
    for (std::size_t i = 0; i <= argmin; ++i) {
        const double r = walk[i].second;
        if (r >= floor && r <= options.window_hi) {
            xs.push_back(walk[i].first);
            ys.push_back(std::log(r));
            deepest_xi = walk[i].first;
        }
    }
    rep.samples_used = static_cast<int>(xs.size());
    if (xs.size() < 5)
        throw WindowError("tangency window is empty: orbit not integrated far enough");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    rep.fitted_rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    const Vec u_deep = trajectory.curve.at(deepest_xi).head(d);
    const Vec dir = (u_deep - cp.point).normalized();
    rep.direction_cosine = std::abs(dir.dot(cp.hessian_eigenvectors.col(0)));

    const bool rate_mild = std::abs(rep.fitted_rate - mild) <= rate_tol;
    const bool aligned = 1.0 - rep.direction_cosine <= options.direction_tol;
    rep.verdict = (rate_mild && aligned) ? TangencyVerdict::slow_tangent : TangencyVerdict::fast;
    return rep;
}

std::vector<CollinearitySample> adjoint_collinearity(const Trajectory& base,
                                                     const AdjointSolution& adjoint,
                                                     double xi_a, double xi_b, int n_samples) {
    const int d = adjoint.dimension;
    std::vector<CollinearitySample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double xi = xi_a + (xi_b - xi_a) * (i + 0.5) / n_samples;
        const Vec udot = base.curve.at(xi).tail(d);
        const Vec psi = adjoint.psi(xi);
        const double denom = udot.squaredNorm();
        CollinearitySample s;
        s.xi = xi;
        s.alpha = denom > 1e-300 ? psi.dot(udot) / denom : 0.0;
        s.residual = (psi - s.alpha * udot).norm() / (psi.norm() + 1e-300);
        out.push_back(s);
    }
    return out;
}

}  // namespace wavefront
