#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "wavefront/linalg.hpp"

namespace wavefront {

using OdeRhs = std::function<void(double xi, const Vec& y, Vec& dy)>;

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 -> heuristic
    long max_steps = 5'000'000;
    double blowup_norm = 1e6;
    double event_tol = 1e-12;  // in xi
};

struct OdeSample {
    double xi;
    Vec y;
    Vec dy;
};

/// Piecewise cubic-Hermite dense output over the accepted steps.
/// Samples are stored with strictly increasing xi.
class Curve {
public:
    bool empty() const { return samples_.empty(); }
    double front_xi() const { return samples_.front().xi; }
    double back_xi() const { return samples_.back().xi; }

    const std::vector<OdeSample>& samples() const { return samples_; }

    Vec at(double xi) const;
    Vec derivative_at(double xi) const;

    void append(OdeSample sample);
    void reverse_in_place();  // flips the xi axis: xi -> -xi, dy -> -dy

private:
    std::size_t segment_index(double xi) const;
    std::vector<OdeSample> samples_;
};

struct OdeEvent {
    std::function<double(double xi, const Vec& y)> fn;
    int direction = 0;     // +1 rising zero, -1 falling, 0 either
    bool terminal = false;
};

struct OdeEventHit {
    std::size_t event_index;
    double xi;
    Vec y;
};

struct OdeResult {
    Curve curve;
    std::vector<OdeEventHit> events;
    bool event_terminated = false;
    long steps = 0;
};

/// Adaptive Dormand-Prince 5(4) pair. Backward spans are handled by
/// integrating the negated field forward and remapping, so there is a single
/// stepping code path. Event roots are located on the dense output by
/// bisection to options.event_tol.
OdeResult integrate_ode(const OdeRhs& rhs, Vec y0, double xi0, double xi1,
                        const OdeOptions& options = {}, std::span<const OdeEvent> events = {});

}  // namespace wavefront
