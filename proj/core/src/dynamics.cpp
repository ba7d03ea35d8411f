#include "wavefront/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "wavefront/errors.hpp"

namespace wavefront {

Vec pack(const PhasePoint& p) {
    Vec y(p.u.size() + p.v.size());
    y.head(p.u.size()) = p.u;
    y.tail(p.v.size()) = p.v;
    return y;
}

PhasePoint unpack(const Vec& y) {
    const Eigen::Index d = y.size() / 2;
    return PhasePoint{y.head(d), y.tail(d)};
}

PhasePoint vector_field(const PotentialModel& model, double c, const PhasePoint& U) {
    return PhasePoint{U.v, model.gradient(U.u) - c * U.v};
}

double hamiltonian(const PotentialModel& model, const PhasePoint& U) {
    return 0.5 * U.v.squaredNorm() - model.value(U.u);
}

namespace {

OdeEvent make_ode_event(const PotentialModel& model, double c, const EventSpec& spec, int d) {
    OdeEvent ev;
    ev.terminal = spec.terminal;
    ev.direction = spec.crossing_direction;
    switch (spec.kind) {
        case EventKind::symmetry_crossing:
            if (spec.direction.size() > 0) {
                Vec dir = spec.direction;
                ev.fn = [dir, d](double, const Vec& y) { return dir.dot(y.tail(d)); };
            } else if (d == 1) {
                ev.fn = [d](double, const Vec& y) { return y(1); };
            } else {
                // d|v|^2/2 dxi = v . (grad V - c v): sign changes at speed extrema.
                const PotentialModel* m = &model;
                ev.fn = [m, c, d](double, const Vec& y) {
                    const Vec v = y.tail(d);
                    return v.dot(m->gradient(y.head(d)) - c * v);
                };
            }
            break;
        case EventKind::ball_exit:
        case EventKind::ball_entry: {
            Vec center = spec.center;
            const double radius = spec.radius;
            ev.fn = [center, radius](double, const Vec& y) { return (y - center).norm() - radius; };
            if (ev.direction == 0)
                ev.direction = spec.kind == EventKind::ball_exit ? +1 : -1;
            break;
        }
        case EventKind::manifold_boundary: {
            Vec center = spec.center;
            Mat proj = spec.projector;
            const double radius = spec.radius;
            if (proj.size() == 0) {
                ev.fn = [center, radius](double, const Vec& y) {
                    return (y - center).norm() - radius;
                };
            } else {
                ev.fn = [center, proj, radius](double, const Vec& y) {
                    return (proj * (y - center)).norm() - radius;
                };
            }
            break;
        }
    }
    return ev;
}

}  // namespace

IntegrationResult integrate(const PotentialModel& model, double c, const PhasePoint& U0,
                            double xi0, double xi1, const IntegrationOptions& options,
                            std::span<const EventSpec> events) {
    const int d = model.dimension();
    if (U0.dimension() != d || U0.v.size() != d)
        throw InvalidInputError("integrate: phase point dimension mismatch");
    if (!(options.tol > 0.0)) throw InvalidInputError("integrate: tol must be positive");

    OdeRhs rhs = [&model, c, d](double, const Vec& y, Vec& dy) {
        dy.resize(2 * d);
        dy.head(d) = y.tail(d);
        dy.tail(d) = model.gradient(y.head(d)) - c * y.tail(d);
    };

    std::vector<OdeEvent> ode_events;
    ode_events.reserve(events.size());
    for (const auto& spec : events) {
        if ((spec.kind == EventKind::ball_exit || spec.kind == EventKind::ball_entry ||
             spec.kind == EventKind::manifold_boundary) &&
            !(spec.radius > 0.0))
            throw InvalidInputError("event radius must be positive");
        ode_events.push_back(make_ode_event(model, c, spec, d));
    }

    OdeOptions opt;
    opt.rel_tol = options.tol;
    opt.abs_tol = options.abs_tol > 0.0 ? options.abs_tol : options.tol * 1e-2;
    opt.blowup_norm = options.blowup_radius;
    opt.event_tol = options.event_tol;
    opt.max_steps = options.max_steps;
    opt.max_step = options.max_step;

    OdeResult raw = integrate_ode(rhs, pack(U0), xi0, xi1, opt, ode_events);

    IntegrationResult out;
    out.trajectory.speed = c;
    out.trajectory.curve = std::move(raw.curve);
    out.event_terminated = raw.event_terminated;
    out.events.reserve(raw.events.size());
    for (const auto& hit : raw.events)
        out.events.push_back({hit.event_index, hit.xi, unpack(hit.y)});
    return out;
}

namespace {

// 5-point Gauss-Legendre nodes/weights on [0, 1].
constexpr double gl_x[5] = {0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                            0.953089922969332};
constexpr double gl_w[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444,
                            0.239314335249683, 0.118463442528095};

}  // namespace

double kinetic_integral(const Trajectory& trajectory) {
    const auto& samples = trajectory.curve.samples();
    const Eigen::Index d = samples.front().y.size() / 2;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double h = samples[i + 1].xi - samples[i].xi;
        for (int k = 0; k < 5; ++k) {
            const Vec y = trajectory.curve.at(samples[i].xi + gl_x[k] * h);
            total += gl_w[k] * h * y.tail(d).squaredNorm();
        }
    }
    return total;
}

double dissipation_residual(const PotentialModel& model, const Trajectory& trajectory) {
    const auto& samples = trajectory.curve.samples();
    if (samples.empty()) throw InvalidInputError("dissipation_residual: empty trajectory");
    const Eigen::Index d = samples.front().y.size() / 2;
    const double c = trajectory.speed;
    const double h0 = hamiltonian(model, unpack(samples.front().y));

    double residual = 0.0;
    double kinetic = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0) {
            const double h = samples[i].xi - samples[i - 1].xi;
            for (int k = 0; k < 5; ++k) {
                const Vec y = trajectory.curve.at(samples[i - 1].xi + gl_x[k] * h);
                kinetic += gl_w[k] * h * y.tail(d).squaredNorm();
            }
        }
        const double hv = hamiltonian(model, unpack(samples[i].y));
        residual = std::max(residual, std::abs(hv - h0 + c * kinetic));
    }
    return residual;
}

double trajectory_consistency_residual(const PotentialModel& model, const Trajectory& trajectory,
                                       const IntegrationOptions& options) {
    const auto& samples = trajectory.curve.samples();
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        IntegrationResult leg = integrate(model, trajectory.speed, unpack(samples[i].y),
                                          samples[i].xi, samples[i + 1].xi, options);
        worst = std::max(worst,
                         (leg.trajectory.curve.samples().back().y - samples[i + 1].y).norm());
    }
    return worst;
}

}  // namespace wavefront
