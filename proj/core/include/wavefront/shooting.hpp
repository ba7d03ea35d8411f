#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wavefront/manifolds.hpp"

namespace wavefront {

struct ShootingOptions {
    double solve_tol_scale = 1e-9;    // mismatch tolerance = scale * (1 + |E_+|)
    double symmetry_margin = 1e-6;    // pulse classification threshold on min |v|
    double level_tol_scale = 1e-10;   // standing-front level test = scale * (1 + |V|)
    int max_iterations = 200;
    double integrator_tol = 1e-12;
    ManifoldOptions manifold;         // radius 0 -> auto per equilibrium
    double max_flight_time = 200.0;
    double tail_target = 1e-9;        // tails integrate until this close to E
    double tail_span = 80.0;          // hard cap on each tail leg
    int scan_grid = 33;               // default speed-scan resolution for seeding
};

/// Travelling-front problem: connect e_- to a minimum e_+ at an unknown
/// speed c in [c_min, c_max]. Requires V(e_-) < V(e_+).
struct FrontProblem {
    std::shared_ptr<const PotentialModel> model;
    CriticalPoint departure;
    CriticalPoint arrival;
    double c_min = 0.0;
    double c_max = 0.0;
};

enum class ConnectionKind { front, symmetric_pulse, asymmetric_pulse };

struct ConnectionSolution {
    ConnectionKind kind = ConnectionKind::front;
    double c = 0.0;
    Vec b_unstable;        // tangent coordinate on the unstable boundary sphere
    Vec b_stable;          // tangent coordinate on the stable boundary sphere (empty for symmetric)
    double flight_time = 0.0;  // xi between the two boundary crossings
    double turning_time = std::numeric_limits<double>::quiet_NaN();  // symmetric pulses
    double mismatch_norm = 0.0;
    Trajectory trajectory;  // assembled profile; departure boundary crossing at xi = 0
    bool symmetric_flag = false;
    bool converged_to_symmetric = false;
    double min_symmetry_distance = std::numeric_limits<double>::infinity();
    CriticalPoint departure;
    CriticalPoint arrival;
    double r_unstable = 0.0;  // manifold radii used by the solve
    double r_stable = 0.0;
};

/// Seeds for the general-dimension solvers; all optional.
struct ShootingSeeds {
    std::optional<Vec> b_unstable;
    std::optional<Vec> b_stable;
    std::optional<double> flight_time;
    std::optional<double> c;
    int sign = +1;  // departure sign along the mild unstable direction
};

/// Phi^u(b_u, xi, c) - Phi^s(b_s, c): the front endpoint mismatch in R^{2d}.
Vec mismatch_front(const FrontProblem& problem, const Vec& b_unstable, const Vec& b_stable,
                   double xi, double c, const ShootingOptions& options = {});

ConnectionSolution solve_front(const FrontProblem& problem, const ShootingOptions& options = {},
                               const ShootingSeeds& seeds = {});

/// One integration per grid speed from a fixed departure coordinate; the
/// returned indicator changes sign across candidate front speeds.
std::vector<std::pair<double, double>> scan_speed(const FrontProblem& problem,
                                                  std::span<const double> c_grid,
                                                  const ShootingOptions& options = {});

ConnectionSolution solve_symmetric_pulse(std::shared_ptr<const PotentialModel> model,
                                         const CriticalPoint& equilibrium,
                                         const ShootingOptions& options = {},
                                         const ShootingSeeds& seeds = {});

ConnectionSolution solve_asymmetric_pulse(std::shared_ptr<const PotentialModel> model,
                                          const CriticalPoint& equilibrium,
                                          const ShootingOptions& options = {},
                                          const ShootingSeeds& seeds = {});

enum class ObstructionVerdict { Obstructed, PossiblyConnectable };

/// Standing fronts require both endpoints on the same level set of V; the
/// solver for the (generically absent) equal-level case is out of scope.
ObstructionVerdict check_standing_front_obstruction(const PotentialModel& model,
                                                    const CriticalPoint& e_minus,
                                                    const CriticalPoint& e_plus,
                                                    const ShootingOptions& options = {});

}  // namespace wavefront
