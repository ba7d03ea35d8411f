#pragma once

#include "wavefront/shooting.hpp"

namespace wavefront {

enum class TransversalityVerdict { transverse, degenerate, elementary, non_elementary };

struct TransversalityReport {
    ConnectionKind kind = ConnectionKind::front;
    int rows = 0;
    int cols = 0;
    int target_rank = 0;
    int rank = 0;
    Vec singular_values;
    TransversalityVerdict verdict = TransversalityVerdict::degenerate;
    double margin = 0.0;  // target_rank-th singular value
    Mat jacobian;
    std::string details;
};

struct DiagnosticsOptions {
    double rank_tol = 1e-6;   // relative singular-value cutoff
    double fd_step = 1e-6;    // scaled per unknown, central differences
    double integrator_tol = 1e-12;
};

/// Rank assessment shared by all certification paths (and by self-tests that
/// doctor the Jacobian directly, e.g. duplicating a column).
TransversalityReport assess_rank(const Mat& jacobian, int target_rank, ConnectionKind kind,
                                 double rank_tol = 1e-6);

/// D(DeltaPhi) for a travelling front: columns over (b_u, b_s, xi, c); the
/// xi-column is the vector field at the matching point, the c-column is a
/// central difference with both local manifolds rebuilt at c +- h.
TransversalityReport transversality_front(const FrontProblem& problem,
                                          const ConnectionSolution& solution,
                                          const DiagnosticsOptions& options = {});

/// Jacobian of the endpoint velocity map over (b_u, xi) for a symmetric
/// standing pulse; elementary iff it has full rank d.
TransversalityReport elementarity_symmetric(std::shared_ptr<const PotentialModel> model,
                                            const ConnectionSolution& solution,
                                            const DiagnosticsOptions& options = {});

/// Level-set transversality of an asymmetric standing pulse: ambient columns
/// projected off the Hamiltonian gradient; full rank 2d-1 required.
TransversalityReport transversality_asymmetric(std::shared_ptr<const PotentialModel> model,
                                               const ConnectionSolution& solution,
                                               const DiagnosticsOptions& options = {});

/// Solution (phi, psi) of the adjoint linearized system along a base
/// trajectory, obtained by backward integration from the terminal data.
struct AdjointSolution {
    Curve curve;  // packed (phi, psi), ascending xi
    int dimension = 0;

    Vec phi(double xi) const { return curve.at(xi).head(dimension); }
    Vec psi(double xi) const { return curve.at(xi).tail(dimension); }
};

AdjointSolution adjoint_integrate(const PotentialModel& model, const Trajectory& base,
                                  const Vec& phi_terminal, const Vec& psi_terminal,
                                  double xi_from, double xi_to,
                                  const DiagnosticsOptions& options = {});

/// <(phi, psi)(xi), (du, dv)>; conserved along forward linearized solutions.
double adjoint_pairing(const AdjointSolution& adjoint, double xi, const Vec& delta_u,
                       const Vec& delta_v);

/// First-order change of <mismatch, (phi_1, psi_1)> under V -> V + eps W:
/// the quadrature of grad W(u_1(xi)) . psi(xi) over the span.
double melnikov_sensitivity(const PotentialModel& perturbation, const Trajectory& base,
                            const AdjointSolution& adjoint, double xi0, double xi1);

/// DPhi^u . (0,0,0,W): endpoint derivative of the flow under the potential
/// perturbation, via the inhomogeneous variational equation along the base.
Vec melnikov_state_derivative(const PotentialModel& model, const PotentialModel& perturbation,
                              const Trajectory& base, double xi0, double xi1,
                              const DiagnosticsOptions& options = {});

/// Predicted first-order drift of the front unknowns (b_u, b_s, xi, c) under
/// V -> V + eps W, from the solved linear system J dx = -M_W. The last entry
/// is dc/deps.
Vec front_parameter_sensitivity(const FrontProblem& problem, const ConnectionSolution& solution,
                                const PotentialModel& perturbation,
                                const DiagnosticsOptions& options = {});

enum class TangencyVerdict { slow_tangent, fast, unavailable };

enum class TrajectoryEnd { left, right };

struct TangencyOptions {
    double window_lo = 1e-8;
    double window_hi = 1e-3;
    double rate_tol = 0.0;        // 0 -> quarter of the mild/strong gap
    double direction_tol = 1e-4;  // on 1 - |cos|
};

struct TangencyReport {
    TangencyVerdict verdict = TangencyVerdict::unavailable;
    double fitted_rate = 0.0;
    double direction_cosine = 0.0;
    double expected_rate = 0.0;  // mild rate at this end
    int samples_used = 0;
    std::string details;
};

/// Classifies how the trajectory approaches the end equilibrium: along the
/// mild (smallest-eigenvalue) direction at the mild rate, or strictly
/// faster. Samples past the numerical noise floor (where |u - e| rebounds)
/// are excluded from the fit.
TangencyReport tangency_check(const Trajectory& trajectory,
                              const EquilibriumSpectrum& end_spectrum, TrajectoryEnd end,
                              const TangencyOptions& options = {});

/// Collinearity profile of the adjoint against the trajectory derivative:
/// samples of alpha(xi) = psi . du/dxi / |du/dxi|^2 and the off-collinear
/// remainder. Feeds the exclusion identity c alpha |du|^2 = d/dxi pairing.
struct CollinearitySample {
    double xi;
    double alpha;
    double residual;  // |psi - alpha du| / (|psi| + eps)
};

std::vector<CollinearitySample> adjoint_collinearity(const Trajectory& base,
                                                     const AdjointSolution& adjoint,
                                                     double xi_a, double xi_b, int n_samples);

}  // namespace wavefront
