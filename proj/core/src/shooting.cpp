#include "wavefront/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "wavefront/errors.hpp"
#include "wavefront/parallel.hpp"

namespace wavefront {

namespace {

// ---------------------------------------------------------------------------
// Sphere charts. A boundary coordinate b lives on the radius-r sphere of the
// tangent subspace; steps are taken in the tangent hyperplane at b and pulled
// back by renormalization.

Mat sphere_chart(const Vec& b) {
    const Eigen::Index n = b.size();
    if (n == 1) return Mat(1, 0);
    return orthonormal_complement(b.normalized());
}

Vec retract(const Vec& b, const Mat& chart, const Vec& t, double radius) {
    if (t.size() == 0) return b;
    Vec w = b + chart * t;
    return radius * w.normalized();
}

// ---------------------------------------------------------------------------
// Damped least squares with a finite-difference Jacobian. Falls back to a
// line-searched Gauss-Newton step when the LM loop stalls.

struct LeastSquaresResult {
    Vec x;
    Vec residual;
    double norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

LeastSquaresResult levenberg_marquardt(const std::function<Vec(const Vec&)>& f, Vec x0,
                                       double tol, int max_iterations) {
    auto safe_eval = [&](const Vec& x, bool& ok) -> Vec {
        try {
            Vec r = f(x);
            ok = r.allFinite();
            return r;
        } catch (const Error&) {
            ok = false;
            return Vec();
        }
    };

    bool ok = false;
    Vec r = safe_eval(x0, ok);
    if (!ok) throw NoConvergenceError("least squares: residual undefined at the seed");

    LeastSquaresResult out;
    out.x = x0;
    out.residual = r;
    out.norm = r.norm();
    double lambda = 1e-3;

    const Eigen::Index n = x0.size(), m = r.size();
    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it;
        if (out.norm <= tol) {
            out.converged = true;
            return out;
        }
        if (n == 0) break;

        // Forward-difference Jacobian about the current iterate.
        Mat J(m, n);
        bool jac_ok = true;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(out.x(j)));
            Vec xp = out.x;
            xp(j) += h;
            bool fo = false;
            Vec rp = safe_eval(xp, fo);
            if (!fo) {
                xp(j) = out.x(j) - h;
                rp = safe_eval(xp, fo);
                if (!fo) {
                    jac_ok = false;
                    break;
                }
                J.col(j) = (out.residual - rp) / h;
            } else {
                J.col(j) = (rp - out.residual) / h;
            }
        }
        if (!jac_ok) break;

        const Mat JtJ = J.transpose() * J;
        const Vec Jtr = J.transpose() * out.residual;
        Vec scale = JtJ.diagonal().cwiseMax(1e-12);

        bool stepped = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Mat A = JtJ;
            A.diagonal() += lambda * scale;
            Vec delta = A.ldlt().solve(-Jtr);
            bool eo = false;
            Vec rn = safe_eval(out.x + delta, eo);
            if (eo && rn.norm() < out.norm) {
                out.x += delta;
                out.residual = rn;
                out.norm = rn.norm();
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!stepped) {
            // Gauss-Newton with backtracking as a last resort.
            Vec delta = J.colPivHouseholderQr().solve(-out.residual);
            double alpha = 1.0;
            for (int ls = 0; ls < 20; ++ls, alpha *= 0.5) {
                bool eo = false;
                Vec rn = safe_eval(out.x + alpha * delta, eo);
                if (eo && rn.norm() < out.norm) {
                    out.x += alpha * delta;
                    out.residual = rn;
                    out.norm = rn.norm();
                    stepped = true;
                    break;
                }
            }
            if (!stepped) break;
        }
    }
    out.converged = out.norm <= tol;
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory assembly: tail legs run until |U - E| reaches the tail target.

Curve stitched(const std::vector<const Curve*>& legs) {
    Curve out;
    for (const Curve* leg : legs) {
        for (const auto& s : leg->samples()) {
            if (!out.empty() && s.xi <= out.back_xi() + 1e-15) continue;
            out.append(s);
        }
    }
    return out;
}

// Cuts a tail leg at its closest approach to the target equilibrium, so the
// assembled profile ends where the orbit genuinely turns back outward.
Curve trimmed_tail(const Curve& curve, const Vec& target, bool keep_before) {
    const auto& samples = curve.samples();
    std::size_t argmin = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double dist = (samples[i].y - target).norm();
        if (dist < best) {
            best = dist;
            argmin = i;
        }
    }
    Curve out;
    if (keep_before) {
        for (std::size_t i = 0; i <= argmin; ++i) out.append(samples[i]);
    } else {
        for (std::size_t i = argmin; i < samples.size(); ++i) out.append(samples[i]);
    }
    return out;
}

Curve shifted(Curve curve, double delta) {
    Curve out;
    for (auto s : curve.samples()) {
        s.xi += delta;
        out.append(std::move(s));
    }
    return out;
}

// Emits the approach leg between an interior manifold point at depth rho and
// the junction state at the manifold boundary, time-aligned so the boundary
// crossing lands at junction_xi. Only available on one-dimensional tangent
// rays, where the ray is the orbit itself.
std::optional<Curve> manifold_tail(const PotentialModel& model, double c,
                                   const LocalManifold& manifold, const Vec& b,
                                   const Vec& junction_state, double junction_xi,
                                   const ShootingOptions& opts) {
    if (manifold.tangent_dimension() != 1) return std::nullopt;
    const Vec e_state = manifold.equilibrium_state();
    const double junction_dist = (junction_state - e_state).norm();
    const double rho = std::max(opts.tail_target, 1e-7 * (1.0 + e_state.norm()));
    if (rho >= 0.25 * junction_dist) return std::nullopt;

    PhasePoint deep;
    try {
        deep = manifold.sample_at_radius(b, rho);
    } catch (const Error&) {
        return std::nullopt;
    }

    EventSpec exit;
    exit.kind = EventKind::ball_exit;
    exit.center = e_state;
    exit.radius = junction_dist;
    exit.terminal = true;

    IntegrationOptions iopt;
    iopt.tol = opts.integrator_tol;
    iopt.abs_tol = 1e-2 * opts.integrator_tol * rho;

    // Unstable rays expand forward, stable rays expand backward.
    const bool forward = !manifold.contracts_forward();
    IntegrationResult res;
    try {
        res = integrate(model, c, deep, 0.0, forward ? opts.tail_span : -opts.tail_span, iopt,
                        {&exit, 1});
    } catch (const Error&) {
        return std::nullopt;
    }
    if (res.events.empty()) return std::nullopt;
    const double hit = res.events.front().xi;

    // Keep the portion between the deep point and the boundary crossing.
    Curve kept;
    if (forward) {
        for (const auto& s : res.trajectory.curve.samples())
            if (s.xi <= hit) kept.append(s);
        return shifted(std::move(kept), junction_xi - hit);
    }
    for (const auto& s : res.trajectory.curve.samples())
        if (s.xi >= hit) kept.append(s);
    return shifted(std::move(kept), junction_xi - hit);
}

struct TailSpec {
    const LocalManifold* manifold = nullptr;
    Vec b;
};

Trajectory assemble_trajectory(const PotentialModel& model, double c, const PhasePoint& start,
                               double main_span, const Vec& e_back, const Vec& e_fwd,
                               const ShootingOptions& opts, const TailSpec& back_spec = {},
                               const TailSpec& fwd_spec = {}) {
    IntegrationOptions iopt;
    iopt.tol = opts.integrator_tol;
    iopt.max_steps = 20'000'000;

    auto tail_leg = [&](const PhasePoint& from, double at, const Vec& target, bool forward) {
        std::vector<EventSpec> stops(2);
        stops[0].kind = EventKind::ball_entry;
        stops[0].center = target;
        stops[0].radius = opts.tail_target;
        stops[0].terminal = true;
        // Numerical noise eventually re-expands along the departing
        // directions; stop the tail at the rebound instead of following it.
        stops[1].kind = EventKind::ball_exit;
        stops[1].center = target;
        stops[1].radius = 3.0 * (pack(from) - target).norm() + 1e-6;
        stops[1].terminal = true;
        const double span = forward ? opts.tail_span : -opts.tail_span;
        IntegrationResult leg = integrate(model, c, from, at, at + span, iopt, stops);
        return trimmed_tail(leg.trajectory.curve, target, forward);
    };

    IntegrationResult mid = integrate(model, c, start, 0.0, main_span, iopt);
    const Vec end_state = mid.trajectory.curve.samples().back().y;
    const double end_xi = mid.trajectory.curve.back_xi();

    Curve back, fwd;
    std::optional<Curve> deep_back, deep_fwd;
    if (back_spec.manifold)
        deep_back = manifold_tail(model, c, *back_spec.manifold, back_spec.b, pack(start), 0.0,
                                  opts);
    if (fwd_spec.manifold)
        deep_fwd =
            manifold_tail(model, c, *fwd_spec.manifold, fwd_spec.b, end_state, end_xi, opts);

    back = deep_back ? std::move(*deep_back) : tail_leg(start, 0.0, e_back, false);
    fwd = deep_fwd ? std::move(*deep_fwd) : tail_leg(unpack(end_state), end_xi, e_fwd, true);

    Trajectory out;
    out.speed = c;
    out.curve = stitched({&back, &mid.trajectory.curve, &fwd});
    return out;
}

// Number of touches of the reversibility subspace v = 0 on (lo, hi),
// located as speed minima on the dense output that dip below the margin.
int count_symmetry_touches(const Trajectory& traj, double lo, double hi, double margin) {
    const Eigen::Index d = traj.curve.samples().front().y.size() / 2;
    auto g = [&](double xi) {
        const Vec y = traj.curve.at(xi);
        const Vec dy = traj.curve.derivative_at(xi);
        return y.tail(d).dot(dy.tail(d));
    };
    int count = 0;
    const auto& samples = traj.curve.samples();
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        double a = samples[i].xi, b = samples[i + 1].xi;
        if (b <= lo || a >= hi) continue;
        a = std::max(a, lo);
        b = std::min(b, hi);
        double ga = g(a), gb = g(b);
        if (!(ga < 0.0 && gb > 0.0)) continue;
        for (int it = 0; it < 80 && b - a > 1e-13 * (1.0 + std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            (g(mid) < 0.0 ? a : b) = mid;
        }
        if (traj.curve.at(0.5 * (a + b)).tail(d).norm() < margin) ++count;
    }
    return count;
}

double min_symmetry_distance(const Trajectory& traj) {
    const Eigen::Index d = traj.curve.samples().front().y.size() / 2;
    const auto& samples = traj.curve.samples();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) best = std::min(best, s.y.tail(d).norm());
    // Speed minima between samples: locate the zeros of v . dv/dxi on the
    // dense output, where |v| can dip far below any sample value.
    auto g = [&](double xi) {
        const Vec y = traj.curve.at(xi);
        const Vec dy = traj.curve.derivative_at(xi);
        return y.tail(d).dot(dy.tail(d));
    };
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        double lo = samples[i].xi, hi = samples[i + 1].xi;
        double glo = g(lo), ghi = g(hi);
        if (!(glo < 0.0 && ghi > 0.0)) continue;
        for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) < 0.0 ? lo : hi) = mid;
        }
        best = std::min(best, traj.curve.at(0.5 * (lo + hi)).tail(d).norm());
    }
    return best;
}

// ---------------------------------------------------------------------------
// Cached manifold pair for the front solvers; rebuilt whenever c changes.

struct FrontShooter {
    const FrontProblem& problem;
    const ShootingOptions& opts;
    double r_u = 0.0, r_s = 0.0;

    mutable double cached_c = std::numeric_limits<double>::quiet_NaN();
    mutable std::optional<LocalManifold> wu, ws;

    FrontShooter(const FrontProblem& p, const ShootingOptions& o) : problem(p), opts(o) {
        ensure(0.5 * (p.c_min + p.c_max));
        r_u = wu->radius();
        r_s = ws->radius();
    }

    void ensure(double c) const {
        if (c == cached_c && wu && ws) return;
        EquilibriumSpectrum su = spectrum_at(*problem.model, problem.departure, c);
        EquilibriumSpectrum ss = spectrum_at(*problem.model, problem.arrival, c);
        ManifoldOptions mo = opts.manifold;
        mo.integrator_tol = opts.integrator_tol;
        const double gap = (problem.arrival.point - problem.departure.point).norm();
        if (r_u > 0.0) {
            // Radii stay fixed across c so boundary coordinates remain
            // comparable; allow the budget some slack for the basis drift.
            mo.nonlinearity_budget *= 2.0;
            mo.radius = r_u;
            wu = LocalManifold::build(problem.model, su, ManifoldKind::unstable, mo);
            mo.radius = r_s;
            ws = LocalManifold::build(problem.model, ss, ManifoldKind::stable, mo);
        } else {
            wu = LocalManifold::build(problem.model, su, ManifoldKind::unstable, mo);
            ws = LocalManifold::build(problem.model, ss, ManifoldKind::stable, mo);
            // Keep the boundary spheres well separated from the opposite
            // equilibrium.
            const double cap = 0.2 * gap;
            if (wu->radius() > cap) {
                mo.radius = cap;
                wu = LocalManifold::build(problem.model, su, ManifoldKind::unstable, mo);
            }
            if (ws->radius() > cap) {
                mo.radius = cap;
                ws = LocalManifold::build(problem.model, ss, ManifoldKind::stable, mo);
            }
        }
        cached_c = c;
    }

    Vec unstable_state(const Vec& b_u, double c) const {
        ensure(c);
        return pack(wu->sample_boundary(b_u));
    }

    Vec stable_state(const Vec& b_s, double c) const {
        ensure(c);
        return pack(ws->sample_boundary(b_s));
    }

    Vec phi_u(const Vec& b_u, double xi, double c) const {
        ensure(c);
        IntegrationOptions iopt;
        iopt.tol = opts.integrator_tol;
        PhasePoint p0 = wu->sample_boundary(b_u);
        IntegrationResult res = integrate(*problem.model, c, p0, 0.0, xi, iopt);
        return res.trajectory.curve.samples().back().y;
    }

    Vec mismatch(const Vec& b_u, const Vec& b_s, double xi, double c) const {
        return phi_u(b_u, xi, c) - stable_state(b_s, c);
    }
};

double front_solve_tol(const FrontProblem& problem, const ShootingOptions& opts) {
    return opts.solve_tol_scale * (1.0 + problem.arrival.point.norm());
}

void check_front_feasibility(const FrontProblem& problem, const ShootingOptions& opts) {
    const double scale =
        1.0 + std::max(std::abs(problem.departure.value), std::abs(problem.arrival.value));
    if ((problem.departure.point - problem.arrival.point).norm() <
        1e-9 * (1.0 + problem.arrival.point.norm()))
        throw InfeasibleError("fronts connect distinct critical points");
    if (problem.departure.value >= problem.arrival.value - opts.level_tol_scale * scale)
        throw InfeasibleError(
            "travelling fronts require V(e_-) < V(e_+): the dissipation integral "
            "forces a potential drop");
    if (!(problem.c_min >= 0.0) || !(problem.c_max > problem.c_min))
        throw InvalidInputError("front speed interval must satisfy 0 <= c_min < c_max");
}

// Signed overshoot functional used by the d = 1 bisection and by speed scans.
// Positive: the shot stalled short of the arrival point (damping too strong).
// Negative: it shot past (damping too weak).
double overshoot_indicator(const FrontShooter& sh, double c, int sign) {
    const FrontProblem& pb = sh.problem;
    const int d = pb.model->dimension();
    sh.ensure(c);

    Vec along = pb.arrival.point - pb.departure.point;
    const double gap = along.norm();
    along /= gap;

    Vec b_u = Vec::Zero(sh.wu->tangent_dimension());
    b_u(0) = sh.r_u;
    const Vec col = sh.wu->tangent_basis().col(0);
    if (col.head(d).dot(along) * sign < 0.0) b_u(0) = -sh.r_u;

    const PhasePoint p0 = sh.wu->sample_boundary(b_u);
    const double delta = 0.2 * gap;
    const Vec e_plus = pb.arrival.point;

    // Progress events are custom scalars, so this goes through the generic
    // ODE layer directly.
    OdeRhs rhs = [&](double, const Vec& y, Vec& dy) {
        dy.resize(2 * d);
        dy.head(d) = y.tail(d);
        dy.tail(d) = pb.model->gradient(y.head(d)) - c * y.tail(d);
    };
    std::vector<OdeEvent> oev(2);
    oev[0].fn = [&, delta](double, const Vec& y) {
        return (y.head(d) - e_plus).dot(along) - delta;
    };
    oev[0].direction = +1;
    oev[0].terminal = true;
    oev[1].fn = [&](double, const Vec& y) { return y.tail(d).dot(along); };
    oev[1].direction = -1;
    oev[1].terminal = true;

    OdeOptions oopt;
    oopt.rel_tol = sh.opts.integrator_tol;
    oopt.abs_tol = sh.opts.integrator_tol * 1e-2;

    try {
        OdeResult res = integrate_ode(rhs, pack(p0), 0.0, sh.opts.max_flight_time, oopt, oev);
        if (!res.events.empty()) {
            const auto& hit = res.events.front();
            return -(hit.y.head(d) - e_plus).dot(along);
        }
        return -(res.curve.samples().back().y.head(d) - e_plus).dot(along);
    } catch (const EscapeError&) {
        return -(delta + gap);  // escaped past the arrival point
    }
}

}  // namespace

Vec mismatch_front(const FrontProblem& problem, const Vec& b_unstable, const Vec& b_stable,
                   double xi, double c, const ShootingOptions& options) {
    if (!(xi >= 0.0)) throw InvalidInputError("mismatch_front: xi must be nonnegative");
    if (!(c > 0.0)) throw InvalidInputError("mismatch_front: c must be positive");
    FrontShooter sh(problem, options);
    return sh.mismatch(b_unstable, b_stable, xi, c);
}

std::vector<std::pair<double, double>> scan_speed(const FrontProblem& problem,
                                                  std::span<const double> c_grid,
                                                  const ShootingOptions& options) {
    std::vector<std::pair<double, double>> out(c_grid.size());
    if (c_grid.empty()) return out;
    check_front_feasibility(problem, options);
    FrontShooter sh(problem, options);
    // Each worker uses its own shooter (per-c manifold cache is not shared).
    parallel_for(c_grid.size(), [&](std::size_t i) {
        FrontShooter local(problem, options);
        local.r_u = sh.r_u;
        local.r_s = sh.r_s;
        out[i] = {c_grid[i], overshoot_indicator(local, c_grid[i], +1)};
    });
    return out;
}

ConnectionSolution solve_front(const FrontProblem& problem, const ShootingOptions& options,
                               const ShootingSeeds& seeds) {
    check_front_feasibility(problem, options);
    const int d = problem.model->dimension();
    const double tol = front_solve_tol(problem, options);
    FrontShooter sh(problem, options);

    // --- Seed the speed ----------------------------------------------------
    double c0;
    if (seeds.c) {
        c0 = *seeds.c;
    } else {
        // Bisection on the overshoot sign over the speed interval.
        const int n = std::max(3, options.scan_grid);
        std::vector<double> grid(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            grid[static_cast<std::size_t>(i)] =
                problem.c_min + (problem.c_max - problem.c_min) * (i + 0.5) / n;
        std::vector<double> sigma(grid.size());
        parallel_for(grid.size(), [&](std::size_t i) {
            FrontShooter local(problem, options);
            local.r_u = sh.r_u;
            local.r_s = sh.r_s;
            sigma[i] = overshoot_indicator(local, grid[i], seeds.sign);
        });
        std::size_t bracket = grid.size();
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            if (sigma[i] == 0.0 || (sigma[i] < 0.0) != (sigma[i + 1] < 0.0)) {
                bracket = i;
                break;
            }
        }
        if (bracket == grid.size())
            throw NoBracketError("overshoot indicator does not change sign over the interval");
        double lo = grid[bracket], hi = grid[bracket + 1];
        double slo = sigma[bracket];
        for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double sm = overshoot_indicator(sh, mid, seeds.sign);
            if ((slo < 0.0) == (sm < 0.0)) {
                lo = mid;
                slo = sm;
            } else {
                hi = mid;
            }
        }
        c0 = 0.5 * (lo + hi);
    }

    // --- Seed the boundary coordinates and the flight time -----------------
    sh.ensure(c0);
    Vec along = problem.arrival.point - problem.departure.point;
    along.normalize();

    Vec b_u0;
    if (seeds.b_unstable) {
        b_u0 = *seeds.b_unstable;
        b_u0 *= sh.r_u / b_u0.norm();
    } else {
        b_u0 = Vec::Zero(sh.wu->tangent_dimension());
        b_u0(0) = sh.r_u;
        if (sh.wu->tangent_basis().col(0).head(d).dot(along) * seeds.sign < 0.0)
            b_u0(0) = -sh.r_u;
    }

    Vec b_s0;
    double xi0;
    if (seeds.b_stable && seeds.flight_time) {
        b_s0 = *seeds.b_stable;
        b_s0 *= sh.r_s / b_s0.norm();
        xi0 = *seeds.flight_time;
    } else {
        const Vec e_plus_state = sh.ws->equilibrium_state();
        std::vector<EventSpec> events(2);
        events[0].kind = EventKind::ball_entry;
        events[0].center = e_plus_state;
        events[0].radius = sh.r_s;
        events[0].terminal = true;
        // Guard: stop well before an overshot orbit can blow up.
        events[1].kind = EventKind::ball_exit;
        events[1].center = e_plus_state;
        events[1].radius = 2.0 * (problem.departure.point - problem.arrival.point).norm() + 1.0;
        events[1].terminal = true;
        IntegrationOptions iopt;
        iopt.tol = options.integrator_tol;
        IntegrationResult res = integrate(*problem.model, c0, sh.wu->sample_boundary(b_u0), 0.0,
                                          options.max_flight_time, iopt, events);

        Vec hit_state;
        if (!res.events.empty() && res.events.front().event_index == 0) {
            xi0 = res.events.front().xi;
            hit_state = pack(res.events.front().state);
        } else {
            // The shot missed the ball (seed speed off the bracket); seed
            // from the point of closest approach instead.
            const auto& smp = res.trajectory.curve.samples();
            std::size_t argmin = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < smp.size(); ++i) {
                const double dist = (smp[i].y - e_plus_state).norm();
                if (dist < best) {
                    best = dist;
                    argmin = i;
                }
            }
            if (argmin == 0 || argmin + 1 == smp.size())
                throw NoConvergenceError(
                    "seed shot never approached the arrival equilibrium");
            xi0 = smp[argmin].xi;
            hit_state = smp[argmin].y;
        }
        Vec beta = sh.ws->tangent_basis().transpose() * (hit_state - e_plus_state);
        if (beta.norm() < 1e-12 * sh.r_s)
            throw NoConvergenceError("seed entry point projects to zero stable coordinate");
        b_s0 = beta * (sh.r_s / beta.norm());
    }

    // --- Polish with damped least squares over (b_u, b_s, xi, c) -----------
    const Mat chart_u = sphere_chart(b_u0);
    const Mat chart_s = sphere_chart(b_s0);
    const Eigen::Index nu = chart_u.cols(), ns = chart_s.cols();

    auto residual = [&](const Vec& x) -> Vec {
        const Vec b_u = retract(b_u0, chart_u, x.head(nu), sh.r_u);
        const Vec b_s = retract(b_s0, chart_s, x.segment(nu, ns), sh.r_s);
        const double xi = x(nu + ns);
        const double c = x(nu + ns + 1);
        if (!(c > 0.0) || !(xi > 0.0)) throw InvalidInputError("solver left the domain");
        return sh.mismatch(b_u, b_s, xi, c);
    };

    Vec x0 = Vec::Zero(nu + ns + 2);
    x0(nu + ns) = xi0;
    x0(nu + ns + 1) = c0;
    LeastSquaresResult lsq = levenberg_marquardt(residual, x0, tol, options.max_iterations);
    if (!lsq.converged)
        throw MaxIterationsError("front solve did not reach the mismatch tolerance");

    ConnectionSolution sol;
    sol.kind = ConnectionKind::front;
    sol.b_unstable = retract(b_u0, chart_u, lsq.x.head(nu), sh.r_u);
    sol.b_stable = retract(b_s0, chart_s, lsq.x.segment(nu, ns), sh.r_s);
    sol.flight_time = lsq.x(nu + ns);
    sol.c = lsq.x(nu + ns + 1);
    sol.mismatch_norm = lsq.norm;
    sol.departure = problem.departure;
    sol.arrival = problem.arrival;
    sol.r_unstable = sh.r_u;
    sol.r_stable = sh.r_s;

    sh.ensure(sol.c);
    const PhasePoint start = sh.wu->sample_boundary(sol.b_unstable);
    sol.trajectory = assemble_trajectory(*problem.model, sol.c, start, sol.flight_time,
                                         sh.wu->equilibrium_state(), sh.ws->equilibrium_state(),
                                         options, TailSpec{&*sh.wu, sol.b_unstable},
                                         TailSpec{&*sh.ws, sol.b_stable});
    sol.min_symmetry_distance = min_symmetry_distance(sol.trajectory);
    return sol;
}

namespace {

struct PulseSetup {
    EquilibriumSpectrum spectrum;
    LocalManifold wu;
    double tol;
};

PulseSetup pulse_setup(const std::shared_ptr<const PotentialModel>& model,
                       const CriticalPoint& equilibrium, const ShootingOptions& options) {
    EquilibriumSpectrum sp = spectrum_at(*model, equilibrium, 0.0);
    if (sp.unstable_basis.cols() == 0)
        throw InvalidInputError("pulse shooting needs a nontrivial unstable manifold");
    ManifoldOptions mo = options.manifold;
    mo.integrator_tol = options.integrator_tol;
    LocalManifold wu = LocalManifold::build(model, sp, ManifoldKind::unstable, mo);
    const double tol = options.solve_tol_scale * (1.0 + equilibrium.point.norm());
    return PulseSetup{std::move(sp), std::move(wu), tol};
}

// Shot from the unstable boundary; returns candidate symmetry-crossing times.
struct PulseShot {
    std::vector<double> candidates;
    bool returned_to_equilibrium = false;
    bool escaped = false;
};

PulseShot pulse_scan(const PotentialModel& model, const LocalManifold& wu, const Vec& b_u,
                     const ShootingOptions& options) {
    const int d = model.dimension();
    PulseShot shot;

    std::vector<EventSpec> events;
    EventSpec crossing;
    crossing.kind = EventKind::symmetry_crossing;
    crossing.terminal = false;
    if (d > 1) crossing.crossing_direction = +1;  // speed minima only
    events.push_back(crossing);

    EventSpec back;
    back.kind = EventKind::ball_entry;
    back.center = wu.equilibrium_state();
    back.radius = 0.9 * wu.radius();
    back.terminal = true;
    events.push_back(back);

    IntegrationOptions iopt;
    iopt.tol = options.integrator_tol;

    try {
        IntegrationResult res = integrate(model, 0.0, wu.sample_boundary(b_u), 0.0,
                                          options.max_flight_time, iopt, events);
        for (const auto& hit : res.events) {
            if (hit.event_index == 0)
                shot.candidates.push_back(hit.xi);
            else if (hit.event_index == 1 && shot.candidates.empty())
                shot.returned_to_equilibrium = true;
        }
    } catch (const EscapeError&) {
        shot.escaped = true;
    }
    return shot;
}

}  // namespace

ConnectionSolution solve_symmetric_pulse(std::shared_ptr<const PotentialModel> model,
                                         const CriticalPoint& equilibrium,
                                         const ShootingOptions& options,
                                         const ShootingSeeds& seeds) {
    PulseSetup setup = pulse_setup(model, equilibrium, options);
    const int d = model->dimension();
    const double r_u = setup.wu.radius();

    std::vector<int> signs = {seeds.sign, -seeds.sign};
    std::string failure = "no symmetry crossing found";

    for (int sign : signs) {
        Vec b_u0;
        if (seeds.b_unstable) {
            b_u0 = *seeds.b_unstable * static_cast<double>(sign);
            b_u0 *= r_u / b_u0.norm();
        } else {
            b_u0 = Vec::Zero(setup.wu.tangent_dimension());
            b_u0(0) = sign * r_u;
        }

        std::vector<double> xi_candidates;
        if (seeds.flight_time) {
            xi_candidates.push_back(*seeds.flight_time);
        } else {
            PulseShot shot = pulse_scan(*model, setup.wu, b_u0, options);
            if (shot.returned_to_equilibrium) {
                failure = "orbit re-entered the local unstable box without a symmetry crossing";
                continue;
            }
            if (shot.escaped || shot.candidates.empty()) {
                failure = shot.escaped ? "orbit escaped before any symmetry crossing"
                                       : "no symmetry crossing found within the flight window";
                continue;
            }
            const std::size_t take = std::min<std::size_t>(3, shot.candidates.size());
            xi_candidates.assign(shot.candidates.begin(),
                                 shot.candidates.begin() + static_cast<long>(take));
        }

        const Mat chart = sphere_chart(b_u0);
        const Eigen::Index nu = chart.cols();
        IntegrationOptions iopt;
        iopt.tol = options.integrator_tol;

        for (double xi0 : xi_candidates) {
            auto residual = [&](const Vec& x) -> Vec {
                const Vec b_u = retract(b_u0, chart, x.head(nu), r_u);
                const double xi = x(nu);
                if (!(xi > 0.0)) throw InvalidInputError("solver left the domain");
                IntegrationResult res = integrate(*model, 0.0, setup.wu.sample_boundary(b_u),
                                                  0.0, xi, iopt);
                return res.trajectory.curve.samples().back().y.tail(d);
            };
            Vec x0 = Vec::Zero(nu + 1);
            x0(nu) = xi0;
            LeastSquaresResult lsq;
            try {
                lsq = levenberg_marquardt(residual, x0, setup.tol, options.max_iterations);
            } catch (const Error&) {
                continue;
            }
            if (!lsq.converged) continue;

            ConnectionSolution sol;
            sol.kind = ConnectionKind::symmetric_pulse;
            sol.c = 0.0;
            sol.b_unstable = retract(b_u0, chart, lsq.x.head(nu), r_u);
            sol.flight_time = lsq.x(nu);
            sol.turning_time = lsq.x(nu);
            sol.mismatch_norm = lsq.norm;
            sol.symmetric_flag = true;
            sol.departure = equilibrium;
            sol.arrival = equilibrium;
            sol.r_unstable = r_u;
            sol.r_stable = r_u;

            const PhasePoint start = setup.wu.sample_boundary(sol.b_unstable);
            const Vec e_state = setup.wu.equilibrium_state();

            // Stable-side tail: project the symmetric exit point onto the
            // stable tangent ray (the mirror image of the departure).
            ManifoldOptions smo = options.manifold;
            smo.integrator_tol = options.integrator_tol;
            smo.radius = r_u;
            smo.nonlinearity_budget *= 2.0;
            LocalManifold ws =
                LocalManifold::build(model, setup.spectrum, ManifoldKind::stable, smo);
            IntegrationOptions iopt2;
            iopt2.tol = options.integrator_tol;
            const Vec exit_state =
                pack(integrate(*model, 0.0, start, 0.0, 2.0 * sol.turning_time, iopt2)
                         .trajectory.at(2.0 * sol.turning_time));
            Vec b_exit = ws.tangent_basis().transpose() * (exit_state - e_state);
            if (b_exit.norm() > 1e-12) b_exit *= ws.radius() / b_exit.norm();

            sol.trajectory = assemble_trajectory(
                *model, 0.0, start, 2.0 * sol.turning_time, e_state, e_state, options,
                TailSpec{&setup.wu, sol.b_unstable},
                b_exit.norm() > 0.0 ? TailSpec{&ws, b_exit} : TailSpec{});
            sol.min_symmetry_distance = 0.0;

            // A pulse has at most one turning time; more than one symmetry
            // touch means the orbit is not homoclinic.
            const int touches = count_symmetry_touches(
                sol.trajectory, 1e-6, 2.0 * sol.turning_time - 1e-6, options.symmetry_margin);
            if (touches != 1)
                throw NoConvergenceError("turning time is not unique: found " +
                                         std::to_string(touches) + " symmetry crossings");
            return sol;
        }
        failure = "pulse polish did not converge from any candidate turning time";
    }
    if (failure.find("re-entered") != std::string::npos)
        throw ReturnsToEquilibriumError(failure);
    throw NoConvergenceError(failure);
}

ConnectionSolution solve_asymmetric_pulse(std::shared_ptr<const PotentialModel> model,
                                          const CriticalPoint& equilibrium,
                                          const ShootingOptions& options,
                                          const ShootingSeeds& seeds) {
    PulseSetup setup = pulse_setup(model, equilibrium, options);
    const int d = model->dimension();
    const double r_u = setup.wu.radius();

    ManifoldOptions mo = options.manifold;
    mo.integrator_tol = options.integrator_tol;
    mo.radius = r_u;  // same box on both sides
    mo.nonlinearity_budget *= 2.0;
    LocalManifold ws = LocalManifold::build(model, setup.spectrum, ManifoldKind::stable, mo);
    const double r_s = ws.radius();
    const Vec e_state = setup.wu.equilibrium_state();

    Vec b_u0;
    if (seeds.b_unstable) {
        b_u0 = *seeds.b_unstable;
        b_u0 *= r_u / b_u0.norm();
    } else {
        b_u0 = Vec::Zero(setup.wu.tangent_dimension());
        b_u0(0) = seeds.sign * r_u;
    }

    // Seed flight time and stable coordinate from the first re-entry.
    double xi0;
    Vec b_s0;
    if (seeds.flight_time && seeds.b_stable) {
        xi0 = *seeds.flight_time;
        b_s0 = *seeds.b_stable;
        b_s0 *= r_s / b_s0.norm();
    } else {
        EventSpec entry;
        entry.kind = EventKind::ball_entry;
        entry.center = e_state;
        entry.radius = r_s;
        entry.terminal = true;
        IntegrationOptions iopt;
        iopt.tol = options.integrator_tol;
        IntegrationResult res;
        try {
            res = integrate(*model, 0.0, setup.wu.sample_boundary(b_u0), 0.0,
                            options.max_flight_time, iopt, {&entry, 1});
        } catch (const EscapeError&) {
            throw NoConvergenceError("orbit escaped before returning to the equilibrium ball");
        }
        if (res.events.empty())
            throw NoConvergenceError("orbit never returned to the equilibrium ball");
        xi0 = res.events.front().xi;
        Vec beta = ws.tangent_basis().transpose() * (pack(res.events.front().state) - e_state);
        if (beta.norm() < 1e-12 * r_s)
            throw NoConvergenceError("re-entry point projects to zero stable coordinate");
        b_s0 = beta * (r_s / beta.norm());
    }

    // Level-set coordinates: project the mismatch off the Hamiltonian
    // gradient at the (fixed) seed target point.
    const Vec target0 = pack(ws.sample_boundary(b_s0));
    Vec grad_h(2 * d);
    grad_h.head(d) = -model->gradient(target0.head(d));
    grad_h.tail(d) = target0.tail(d);
    if (grad_h.norm() < 1e-14)
        throw NoConvergenceError("Hamiltonian gradient vanishes at the target point");
    const Mat level_basis = orthonormal_complement(grad_h);  // 2d x (2d-1)

    const Mat chart_u = sphere_chart(b_u0);
    const Mat chart_s = sphere_chart(b_s0);
    const Eigen::Index nu = chart_u.cols(), ns = chart_s.cols();
    IntegrationOptions iopt;
    iopt.tol = options.integrator_tol;

    auto residual = [&](const Vec& x) -> Vec {
        const Vec b_u = retract(b_u0, chart_u, x.head(nu), r_u);
        const Vec b_s = retract(b_s0, chart_s, x.segment(nu, ns), r_s);
        const double xi = x(nu + ns);
        if (!(xi > 0.0)) throw InvalidInputError("solver left the domain");
        IntegrationResult res =
            integrate(*model, 0.0, setup.wu.sample_boundary(b_u), 0.0, xi, iopt);
        const Vec delta = res.trajectory.curve.samples().back().y - pack(ws.sample_boundary(b_s));
        return level_basis.transpose() * delta;
    };

    Vec x0 = Vec::Zero(nu + ns + 1);
    x0(nu + ns) = xi0;
    LeastSquaresResult lsq = levenberg_marquardt(residual, x0, setup.tol, options.max_iterations);
    if (!lsq.converged)
        throw NoConvergenceError("asymmetric pulse solve did not reach the mismatch tolerance");

    // The Hamiltonian component of the mismatch was projected out; both
    // boundary points sit on H = -V(e) up to graph error, so it must come
    // out near zero on its own.
    {
        const Vec b_u = retract(b_u0, chart_u, lsq.x.head(nu), r_u);
        const Vec b_s = retract(b_s0, chart_s, lsq.x.segment(nu, ns), r_s);
        const double h_end = hamiltonian(*model, unpack(pack(setup.wu.sample_boundary(b_u))));
        const double h_target = hamiltonian(*model, ws.sample_boundary(b_s));
        if (std::abs(h_end - h_target) > 1e4 * setup.tol * (1.0 + std::abs(h_target)))
            throw NoConvergenceError(
                "Hamiltonian constraint not met: boundary points on different levels");
    }

    ConnectionSolution sol;
    sol.kind = ConnectionKind::asymmetric_pulse;
    sol.c = 0.0;
    sol.b_unstable = retract(b_u0, chart_u, lsq.x.head(nu), r_u);
    sol.b_stable = retract(b_s0, chart_s, lsq.x.segment(nu, ns), r_s);
    sol.flight_time = lsq.x(nu + ns);
    sol.mismatch_norm = lsq.norm;
    sol.departure = equilibrium;
    sol.arrival = equilibrium;
    sol.r_unstable = r_u;
    sol.r_stable = r_s;

    const PhasePoint start = setup.wu.sample_boundary(sol.b_unstable);
    sol.trajectory = assemble_trajectory(*model, 0.0, start, sol.flight_time, e_state, e_state,
                                         options, TailSpec{&setup.wu, sol.b_unstable},
                                         TailSpec{&ws, sol.b_stable});
    sol.min_symmetry_distance = min_symmetry_distance(sol.trajectory);
    sol.converged_to_symmetric = sol.min_symmetry_distance < options.symmetry_margin;
    sol.symmetric_flag = sol.converged_to_symmetric;
    return sol;
}

ObstructionVerdict check_standing_front_obstruction(const PotentialModel& model,
                                                    const CriticalPoint& e_minus,
                                                    const CriticalPoint& e_plus,
                                                    const ShootingOptions& options) {
    (void)model;
    if ((e_minus.point - e_plus.point).norm() < 1e-9 * (1.0 + e_plus.point.norm()))
        throw InvalidInputError("standing fronts connect distinct critical points");
    const double scale = 1.0 + std::max(std::abs(e_minus.value), std::abs(e_plus.value));
    if (std::abs(e_minus.value - e_plus.value) > options.level_tol_scale * scale)
        return ObstructionVerdict::Obstructed;
    return ObstructionVerdict::PossiblyConnectable;
}

}  // namespace wavefront
