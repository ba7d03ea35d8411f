#pragma once

#include "wavefront/diagnostics.hpp"

namespace wavefront {

/// Radial profile rho(r) = exp(1 - 1/(1 - r^2)) on (-1, 1), 0 outside.
/// Smooth, even, rho(0) = 1.
double bump_profile(double r);
double bump_profile_derivative(double r);
double bump_profile_second_derivative(double r);

/// W(u) = rho(|u - center| / eps) * (direction . (u - center)).
/// Vanishes identically (bit-exact) outside the closed eps-ball.
std::shared_ptr<const PotentialModel> case1_bump(const Vec& center, double eps,
                                                 const Vec& direction);

/// W(u) = rho(|u - center| / eps).
std::shared_ptr<const PotentialModel> case2_bump(const Vec& center, double eps);

/// base + sum of amplitude * term. Analytic whenever every part is.
class PerturbedPotential final : public PotentialModel {
public:
    struct Term {
        std::shared_ptr<const PotentialModel> perturbation;
        double amplitude = 0.0;
    };

    PerturbedPotential(std::shared_ptr<const PotentialModel> base, std::vector<Term> terms);

    const PotentialModel& base() const { return *base_; }
    const std::vector<Term>& terms() const { return terms_; }

protected:
    double value_impl(const Vec& u) const override;
    Vec gradient_impl(const Vec& u) const override;
    Mat hessian_impl(const Vec& u) const override;

private:
    std::shared_ptr<const PotentialModel> base_;
    std::vector<Term> terms_;
};

std::shared_ptr<const PotentialModel> perturbed(std::shared_ptr<const PotentialModel> base,
                                                std::shared_ptr<const PotentialModel> term,
                                                double amplitude);

/// V_pert(u) = V(u) - (eps/2) ((u - e) . u_1)^2 rho(|u - e| / delta).
/// Keeps e critical, lowers the smallest Hessian eigenvalue by eps so it
/// becomes simple, and leaves the other eigenvalues untouched. The delta-ball
/// must contain no other critical point.
std::shared_ptr<const PotentialModel> smallest_eigenvalue_splitter(
    std::shared_ptr<const PotentialModel> model, const CriticalPoint& minimum, double eps_amp,
    double delta_radius);

struct RobustnessRung {
    double amplitude = 0.0;
    bool converged = false;
    double c = 0.0;
    double delta_c = 0.0;
    double profile_drift = 0.0;  // max |u - u_0| over the overlapping span
    double mismatch = 0.0;
    std::string failure;
};

struct RobustnessReport {
    std::vector<RobustnessRung> rungs;
    double survived_up_to = 0.0;       // largest amplitude that re-solved
    double dc_damp_fit = 0.0;          // least-squares slope of c over amplitude
    double dc_damp_predicted = 0.0;    // adjoint-based first-order prediction
};

/// Re-solves the front under V + amp * W for each amplitude, warm-started
/// from the unperturbed solution, and compares the observed speed drift with
/// the adjoint prediction.
RobustnessReport robustness_experiment(const FrontProblem& problem,
                                       const ConnectionSolution& solution,
                                       std::shared_ptr<const PotentialModel> perturbation,
                                       std::span<const double> amplitudes,
                                       const ShootingOptions& options = {});

/// Default geometric amplitude ladder 1e-6 ... 1e-2.
std::vector<double> default_amplitude_ladder();

}  // namespace wavefront
