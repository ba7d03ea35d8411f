#include "wavefront/ode.hpp"

#include <algorithm>
#include <cmath>

#include "wavefront/errors.hpp"

namespace wavefront {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Error weights (5th order minus embedded 4th order solution).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

std::size_t Curve::segment_index(double xi) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), xi,
                               [](double x, const OdeSample& s) { return x < s.xi; });
    std::size_t hi = static_cast<std::size_t>(it - samples_.begin());
    if (hi == 0) return 0;
    if (hi >= samples_.size()) return samples_.size() - 2;
    return hi - 1;
}

Vec Curve::at(double xi) const {
    if (samples_.empty()) throw InvalidInputError("dense output of empty curve");
    if (samples_.size() == 1) return samples_.front().y;
    const std::size_t i = segment_index(xi);
    const OdeSample& s0 = samples_[i];
    const OdeSample& s1 = samples_[i + 1];
    const double h = s1.xi - s0.xi;
    const double t = (xi - s0.xi) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * s0.y + (h10 * h) * s0.dy + h01 * s1.y + (h11 * h) * s1.dy;
}

Vec Curve::derivative_at(double xi) const {
    if (samples_.empty()) throw InvalidInputError("dense output of empty curve");
    if (samples_.size() == 1) return samples_.front().dy;
    const std::size_t i = segment_index(xi);
    const OdeSample& s0 = samples_[i];
    const OdeSample& s1 = samples_[i + 1];
    const double h = s1.xi - s0.xi;
    const double t = (xi - s0.xi) / h;
    const double d00 = (6 * t * t - 6 * t) / h;
    const double d10 = 3 * t * t - 4 * t + 1;
    const double d01 = (-6 * t * t + 6 * t) / h;
    const double d11 = 3 * t * t - 2 * t;
    return d00 * s0.y + d10 * s0.dy + d01 * s1.y + d11 * s1.dy;
}

void Curve::append(OdeSample sample) {
    if (!samples_.empty() && !(sample.xi > samples_.back().xi))
        throw InvalidInputError("curve samples must have increasing xi");
    samples_.push_back(std::move(sample));
}

void Curve::reverse_in_place() {
    std::reverse(samples_.begin(), samples_.end());
    for (auto& s : samples_) {
        s.xi = -s.xi;
        s.dy = -s.dy;
    }
}

namespace {

struct Stepper {
    const OdeRhs& rhs;
    const OdeOptions& opt;
    Vec k1, k2, k3, k4, k5, k6, k7, ytmp;

    Stepper(const OdeRhs& f, const OdeOptions& o, Eigen::Index n)
        : rhs(f), opt(o), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n) {}

    // One attempted step from (s, y) with k1 = g(s, y) already evaluated
    // (FSAL). On acceptance the caller reuses k7 = g(s + h, ynew).
    double attempt(double s, const Vec& y, double h, Vec& ynew) {
        ytmp = y + h * (a21 * k1);
        rhs(s + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(s + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(s + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(s + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(s + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(s + h, ynew, k7);

        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double ei = h * (e1 * k1(i) + e3 * k3(i) + e4 * k4(i) + e5 * k5(i) +
                                   e6 * k6(i) + e7 * k7(i));
            const double sk =
                opt.abs_tol + opt.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
            const double q = ei / sk;
            err += q * q;
        }
        return std::sqrt(err / static_cast<double>(y.size()));
    }
};

double initial_step_heuristic(const OdeRhs& rhs, double s0, const Vec& y0, const Vec& f0,
                              const OdeOptions& opt, double span) {
    const double d0 = y0.norm(), d1 = f0.norm();
    double h = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, 0.1 * span);
    Vec y1 = y0 + h * f0;
    Vec f1(y0.size());
    rhs(s0 + h, y1, f1);
    const double d2 = (f1 - f0).norm() / h;
    const double dm = std::max(d1, d2);
    const double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h * 1e-3);
    return std::max(1e-12, std::min({100.0 * h, h1, 0.1 * span, opt.max_step}));
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& rhs, Vec y0, double xi0, double xi1,
                        const OdeOptions& options, std::span<const OdeEvent> events) {
    if (!y0.allFinite()) throw InvalidInputError("integrate_ode: non-finite initial state");

    const double sign = xi1 >= xi0 ? 1.0 : -1.0;
    const double span = std::abs(xi1 - xi0);
    auto to_xi = [&](double s) { return xi0 + sign * s; };

    // One stepping code path: backward spans integrate the negated field
    // forward in the internal variable s = |xi - xi0|.
    OdeRhs oriented = [&rhs, xi0, sign](double s, const Vec& y, Vec& dy) {
        rhs(xi0 + sign * s, y, dy);
        if (sign < 0.0) dy = -dy;
    };

    OdeResult out;
    Curve internal;  // samples in s
    Stepper st(oriented, options, y0.size());
    Vec y = std::move(y0);
    double s = 0.0;
    oriented(s, y, st.k1);
    internal.append({s, y, st.k1});

    if (span == 0.0) {
        out.curve.append({xi0, internal.samples()[0].y, sign * internal.samples()[0].dy});
        return out;
    }

    std::vector<double> ev_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) ev_prev[e] = events[e].fn(xi0, y);

    double h = options.initial_step > 0.0
                   ? std::min(options.initial_step, span)
                   : initial_step_heuristic(oriented, s, y, st.k1, options, span);

    Vec ynew(y.size());
    bool reached_end = false;
    while (!reached_end && !out.event_terminated) {
        if (++out.steps > options.max_steps)
            throw StiffnessError("integrate_ode: step budget exhausted");
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, s))
            throw StiffnessError("integrate_ode: step size underflow");
        bool last = false;
        if (s + h >= span) {
            h = span - s;
            last = true;
        }

        const double err = st.attempt(s, y, h, ynew);
        if (!ynew.allFinite() || !std::isfinite(err)) {
            if (ynew.allFinite() && ynew.norm() > options.blowup_norm)
                throw EscapeError("integrate_ode: state left the blow-up guard ball");
            h *= 0.25;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        s += h;
        y = ynew;
        st.k1 = st.k7;  // FSAL
        internal.append({s, y, st.k7});
        reached_end = last;

        if (y.norm() > options.blowup_norm)
            throw EscapeError("integrate_ode: state left the blow-up guard ball");

        if (!events.empty()) {
            const auto& smp = internal.samples();
            const double s_prev = smp[smp.size() - 2].xi;
            for (std::size_t e = 0; e < events.size(); ++e) {
                const double g1 = events[e].fn(to_xi(s), y);
                const double g0 = ev_prev[e];
                ev_prev[e] = g1;
                if (g0 == 0.0) continue;  // started on the event surface
                const bool crossed = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
                if (!crossed) continue;
                const int dir = g1 > g0 ? +1 : -1;
                if (events[e].direction != 0 && events[e].direction != dir) continue;

                double lo = s_prev, hi = s, glo = g0;
                for (int it = 0; it < 200 && hi - lo > options.event_tol; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = events[e].fn(to_xi(mid), internal.at(mid));
                    if ((glo <= 0.0) == (gm <= 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                const double se = 0.5 * (lo + hi);
                out.events.push_back({e, to_xi(se), internal.at(se)});
                if (events[e].terminal) out.event_terminated = true;
            }
        }

        if (!reached_end && !out.event_terminated) {
            const double fac = err > 1e-30 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
            h = std::min(h, options.max_step);
        }
    }

    // Remap the internal curve to true xi, ascending.
    const auto& smp = internal.samples();
    if (sign > 0.0) {
        for (const auto& sm : smp) out.curve.append({to_xi(sm.xi), sm.y, sm.dy});
    } else {
        for (auto it = smp.rbegin(); it != smp.rend(); ++it)
            out.curve.append({to_xi(it->xi), it->y, -it->dy});
    }
    std::sort(out.events.begin(), out.events.end(),
              [](const OdeEventHit& a, const OdeEventHit& b) { return a.xi < b.xi; });
    return out;
}

}  // namespace wavefront
