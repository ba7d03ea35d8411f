#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wavefront/ode.hpp"
#include "wavefront/potential.hpp"

namespace wavefront {

/// Phase-space point U = (u, v) with v = du/dxi.
struct PhasePoint {
    Vec u;
    Vec v;

    int dimension() const { return static_cast<int>(u.size()); }
};

Vec pack(const PhasePoint& p);
PhasePoint unpack(const Vec& y);

/// F_{c,V}(u, v) = (v, grad V(u) - c v).
PhasePoint vector_field(const PotentialModel& model, double c, const PhasePoint& U);

/// H_V(u, v) = |v|^2/2 - V(u).
double hamiltonian(const PotentialModel& model, const PhasePoint& U);

enum class EventKind { symmetry_crossing, ball_exit, ball_entry, manifold_boundary };

/// Event surfaces for the flow.
///  - symmetry_crossing: direction.v if a direction is given; v itself for
///    d = 1; otherwise d|v|^2/dxi (so hits mark speed minima/maxima).
///  - ball_exit / ball_entry: |U - center| - radius crossed upward/downward.
///  - manifold_boundary: |P (U - center)| - radius for a projector P.
struct EventSpec {
    EventKind kind = EventKind::symmetry_crossing;
    double radius = 0.0;
    Vec center;          // size 2d where applicable
    Vec direction;       // optional, symmetry_crossing only
    Mat projector;       // optional, manifold_boundary only
    int crossing_direction = 0;  // +1 rising, -1 falling, 0 either (along the path)
    bool terminal = false;
};

/// Time-stamped solution curve of the first-order system, with cubic-Hermite
/// dense output between accepted steps.
struct Trajectory {
    double speed = 0.0;
    int interpolation_order = 3;
    Curve curve;

    PhasePoint at(double xi) const { return unpack(curve.at(xi)); }
    double front_xi() const { return curve.front_xi(); }
    double back_xi() const { return curve.back_xi(); }
};

struct EventHit {
    std::size_t event_index;
    double xi;
    PhasePoint state;
};

struct IntegrationOptions {
    double tol = 1e-10;          // relative tolerance; absolute = tol * 1e-2
    double abs_tol = 0.0;        // 0 -> derived from tol
    double blowup_radius = 1e6;  // guard only; extended potentials never trip it
    double event_tol = 1e-12;
    long max_steps = 5'000'000;
    double max_step = std::numeric_limits<double>::infinity();
};

struct IntegrationResult {
    Trajectory trajectory;
    std::vector<EventHit> events;
    bool event_terminated = false;
};

/// Integrates dU/dxi = F_{c,V}(U) over [xi0, xi1] (backward allowed).
IntegrationResult integrate(const PotentialModel& model, double c, const PhasePoint& U0,
                            double xi0, double xi1, const IntegrationOptions& options = {},
                            std::span<const EventSpec> events = {});

/// Max over samples of |H(U(xi)) - H(U(xi_0)) + c * int |v|^2|. For c = 0
/// this is the Hamiltonian drift.
double dissipation_residual(const PotentialModel& model, const Trajectory& trajectory);

/// The kinetic integral int |v|^2 dxi over the whole trajectory.
double kinetic_integral(const Trajectory& trajectory);

/// Re-integration residual: max distance between stored samples and a fresh
/// integration across each adjacent pair.
double trajectory_consistency_residual(const PotentialModel& model, const Trajectory& trajectory,
                                       const IntegrationOptions& options = {});

}  // namespace wavefront
