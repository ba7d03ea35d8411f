#include "wavefront/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "wavefront/errors.hpp"
#include "wavefront/parallel.hpp"

namespace wavefront {

double bump_profile(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

double bump_profile_derivative(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double w = 1.0 - r2;
    return bump_profile(r) * (-2.0 * r / (w * w));
}

double bump_profile_second_derivative(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double w = 1.0 - r2;
    const double g1 = -2.0 * r / (w * w);
    const double g2 = -2.0 * (1.0 + 3.0 * r2) / (w * w * w);
    return bump_profile(r) * (g2 + g1 * g1);
}

namespace {

// rho'(r)/r, which stays smooth through r = 0.
double bump_q(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double w = 1.0 - r2;
    return -2.0 * bump_profile(r) / (w * w);
}

class Case1Bump final : public PotentialModel {
public:
    Case1Bump(Vec center, double eps, Vec direction)
        : PotentialModel(static_cast<int>(center.size()), DerivativeMode::analytic),
          center_(std::move(center)),
          direction_(std::move(direction)),
          eps_(eps) {
        if (!(eps > 0.0)) throw InvalidInputError("bump radius must be positive");
        if (direction_.size() != center_.size())
            throw InvalidInputError("bump direction dimension mismatch");
        if (std::abs(direction_.norm() - 1.0) > 1e-9)
            throw InvalidInputError("case-1 bump direction must be a unit vector");
    }

protected:
    double value_impl(const Vec& u) const override {
        const Vec x = u - center_;
        const double r = x.norm() / eps_;
        if (r >= 1.0) return 0.0;
        return bump_profile(r) * direction_.dot(x);
    }

    Vec gradient_impl(const Vec& u) const override {
        const Vec x = u - center_;
        const double r = x.norm() / eps_;
        if (r >= 1.0) return Vec::Zero(dimension());
        // grad W = rho_eps(x) dir + (dir . x) grad rho_eps(x),
        // grad rho_eps(x) = q(r) x / eps^2.
        return bump_profile(r) * direction_ +
               direction_.dot(x) * (bump_q(r) / (eps_ * eps_)) * x;
    }

    Mat hessian_impl(const Vec& u) const override {
        const int d = dimension();
        const Vec x = u - center_;
        const double nx = x.norm();
        const double r = nx / eps_;
        if (r >= 1.0) return Mat::Zero(d, d);
        const double q = bump_q(r) / (eps_ * eps_);
        const Vec grad_rho = q * x;
        Mat h = grad_rho * direction_.transpose() + direction_ * grad_rho.transpose();
        const double s = direction_.dot(x);
        if (nx < 1e-12 * eps_) {
            h += s * q * Mat::Identity(d, d);
        } else {
            const Vec n = x / nx;
            const double rho2 = bump_profile_second_derivative(r) / (eps_ * eps_);
            h += s * (rho2 * (n * n.transpose()) +
                      q * (Mat::Identity(d, d) - n * n.transpose()));
        }
        return h;
    }

private:
    Vec center_;
    Vec direction_;
    double eps_;
};

class Case2Bump final : public PotentialModel {
public:
    Case2Bump(Vec center, double eps)
        : PotentialModel(static_cast<int>(center.size()), DerivativeMode::analytic),
          center_(std::move(center)),
          eps_(eps) {
        if (!(eps > 0.0)) throw InvalidInputError("bump radius must be positive");
    }

protected:
    double value_impl(const Vec& u) const override {
        const double r = (u - center_).norm() / eps_;
        return r >= 1.0 ? 0.0 : bump_profile(r);
    }

    Vec gradient_impl(const Vec& u) const override {
        const Vec x = u - center_;
        const double r = x.norm() / eps_;
        if (r >= 1.0) return Vec::Zero(dimension());
        return (bump_q(r) / (eps_ * eps_)) * x;
    }

    Mat hessian_impl(const Vec& u) const override {
        const int d = dimension();
        const Vec x = u - center_;
        const double nx = x.norm();
        const double r = nx / eps_;
        if (r >= 1.0) return Mat::Zero(d, d);
        const double q = bump_q(r) / (eps_ * eps_);
        if (nx < 1e-12 * eps_) return q * Mat::Identity(d, d);
        const Vec n = x / nx;
        const double rho2 = bump_profile_second_derivative(r) / (eps_ * eps_);
        return rho2 * (n * n.transpose()) + q * (Mat::Identity(d, d) - n * n.transpose());
    }

private:
    Vec center_;
    double eps_;
};

class EigenvalueSplitTerm final : public PotentialModel {
public:
    EigenvalueSplitTerm(Vec center, Vec axis, double delta)
        : PotentialModel(static_cast<int>(center.size()), DerivativeMode::analytic),
          center_(std::move(center)),
          axis_(std::move(axis)),
          delta_(delta) {}

    // T(u) = -(1/2) s^2 rho(r), s = (u - e) . u_1, r = |u - e| / delta.
    // The amplitude eps sits in PerturbedPotential.

protected:
    double value_impl(const Vec& u) const override {
        const Vec x = u - center_;
        const double r = x.norm() / delta_;
        if (r >= 1.0) return 0.0;
        const double s = axis_.dot(x);
        return -0.5 * s * s * bump_profile(r);
    }

    Vec gradient_impl(const Vec& u) const override {
        const Vec x = u - center_;
        const double r = x.norm() / delta_;
        if (r >= 1.0) return Vec::Zero(dimension());
        const double s = axis_.dot(x);
        const double rho = bump_profile(r);
        const Vec grad_rho = (bump_q(r) / (delta_ * delta_)) * x;
        return -(s * rho) * axis_ - 0.5 * s * s * grad_rho;
    }

    Mat hessian_impl(const Vec& u) const override {
        const int d = dimension();
        const Vec x = u - center_;
        const double nx = x.norm();
        const double r = nx / delta_;
        if (r >= 1.0) return Mat::Zero(d, d);
        const double s = axis_.dot(x);
        const double rho = bump_profile(r);
        const double q = bump_q(r) / (delta_ * delta_);
        const Vec grad_rho = q * x;

        Mat hess_rho;
        if (nx < 1e-12 * delta_) {
            hess_rho = q * Mat::Identity(d, d);
        } else {
            const Vec n = x / nx;
            const double rho2 = bump_profile_second_derivative(r) / (delta_ * delta_);
            hess_rho = rho2 * (n * n.transpose()) +
                       q * (Mat::Identity(d, d) - n * n.transpose());
        }
        Mat h = -rho * (axis_ * axis_.transpose());
        h -= s * (axis_ * grad_rho.transpose() + grad_rho * axis_.transpose());
        h -= 0.5 * s * s * hess_rho;
        return h;
    }

private:
    Vec center_;
    Vec axis_;
    double delta_;
};

}  // namespace

std::shared_ptr<const PotentialModel> case1_bump(const Vec& center, double eps,
                                                 const Vec& direction) {
    return std::make_shared<Case1Bump>(center, eps, direction);
}

std::shared_ptr<const PotentialModel> case2_bump(const Vec& center, double eps) {
    return std::make_shared<Case2Bump>(center, eps);
}

PerturbedPotential::PerturbedPotential(std::shared_ptr<const PotentialModel> base,
                                       std::vector<Term> terms)
    : PotentialModel(base->dimension(),
                     [&]() {
                         DerivativeMode mode = base->derivative_mode();
                         for (const auto& t : terms)
                             if (t.perturbation->derivative_mode() ==
                                 DerivativeMode::finite_difference)
                                 mode = DerivativeMode::finite_difference;
                         return mode;
                     }()),
      base_(std::move(base)),
      terms_(std::move(terms)) {
    for (const auto& t : terms_)
        if (t.perturbation->dimension() != dimension())
            throw InvalidInputError("perturbation dimension mismatch");
}

double PerturbedPotential::value_impl(const Vec& u) const {
    double v = base_->value(u);
    for (const auto& t : terms_) v += t.amplitude * t.perturbation->value(u);
    return v;
}

Vec PerturbedPotential::gradient_impl(const Vec& u) const {
    Vec g = base_->gradient(u);
    for (const auto& t : terms_) g += t.amplitude * t.perturbation->gradient(u);
    return g;
}

Mat PerturbedPotential::hessian_impl(const Vec& u) const {
    Mat h = base_->hessian(u);
    for (const auto& t : terms_) h += t.amplitude * t.perturbation->hessian(u);
    return h;
}

std::shared_ptr<const PotentialModel> perturbed(std::shared_ptr<const PotentialModel> base,
                                                std::shared_ptr<const PotentialModel> term,
                                                double amplitude) {
    std::vector<PerturbedPotential::Term> terms{{std::move(term), amplitude}};
    return std::make_shared<PerturbedPotential>(std::move(base), std::move(terms));
}

std::shared_ptr<const PotentialModel> smallest_eigenvalue_splitter(
    std::shared_ptr<const PotentialModel> model, const CriticalPoint& minimum, double eps_amp,
    double delta_radius) {
    if (minimum.morse_index != 0)
        throw InvalidInputError("eigenvalue splitter expects a minimum point");
    if (!(delta_radius > 0.0)) throw InvalidInputError("splitter needs a positive radius");
    if (eps_amp < 0.0) throw InvalidInputError("splitter amplitude must be nonnegative");
    if (eps_amp >= minimum.hessian_eigenvalues(0))
        throw InvalidInputError(
            "splitter amplitude reaches the smallest eigenvalue and would destroy minimality");
    if (eps_amp == 0.0) return model;

    auto term = std::make_shared<EigenvalueSplitTerm>(minimum.point,
                                                      minimum.hessian_eigenvectors.col(0),
                                                      delta_radius);
    return perturbed(std::move(model), std::move(term), eps_amp);
}

std::vector<double> default_amplitude_ladder() {
    return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
}

RobustnessReport robustness_experiment(const FrontProblem& problem,
                                       const ConnectionSolution& solution,
                                       std::shared_ptr<const PotentialModel> perturbation,
                                       std::span<const double> amplitudes,
                                       const ShootingOptions& options) {
    RobustnessReport report;
    report.rungs.resize(amplitudes.size());

    DiagnosticsOptions dopt;
    dopt.integrator_tol = options.integrator_tol;
    const Vec sens = front_parameter_sensitivity(problem, solution, *perturbation, dopt);
    report.dc_damp_predicted = sens(sens.size() - 1);

    parallel_for(amplitudes.size(), [&](std::size_t i) {
        RobustnessRung& rung = report.rungs[i];
        rung.amplitude = amplitudes[i];
        try {
            FrontProblem pp = problem;
            pp.model = perturbed(problem.model, perturbation, rung.amplitude);
            // The equilibria may shift (not for bumps off the trace ends,
            // but re-derive them anyway).
            CriticalPointSearchOptions cpo;
            pp.departure = classify_critical_point(*pp.model, problem.departure.point, cpo);
            pp.arrival = classify_critical_point(*pp.model, problem.arrival.point, cpo);

            ShootingSeeds warm;
            warm.b_unstable = solution.b_unstable;
            warm.b_stable = solution.b_stable;
            warm.flight_time = solution.flight_time;
            warm.c = solution.c;
            ConnectionSolution re = solve_front(pp, options, warm);

            rung.converged = true;
            rung.c = re.c;
            rung.delta_c = re.c - solution.c;
            rung.mismatch = re.mismatch_norm;

            const double lo = std::max(solution.trajectory.front_xi(), re.trajectory.front_xi());
            const double hi = std::min(solution.trajectory.back_xi(), re.trajectory.back_xi());
            const int d = problem.model->dimension();
            double drift = 0.0;
            const int probes = 200;
            for (int k = 0; k <= probes; ++k) {
                const double xi = lo + (hi - lo) * k / probes;
                drift = std::max(drift, (solution.trajectory.curve.at(xi).head(d) -
                                         re.trajectory.curve.at(xi).head(d))
                                            .norm());
            }
            rung.profile_drift = drift;
        } catch (const Error& err) {
            rung.converged = false;
            rung.failure = err.what();
        }
    });

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& rung : report.rungs) {
        if (!rung.converged) continue;
        report.survived_up_to = std::max(report.survived_up_to, rung.amplitude);
        sx += rung.amplitude;
        sy += rung.delta_c;
        sxx += rung.amplitude * rung.amplitude;
        sxy += rung.amplitude * rung.delta_c;
        ++n;
    }
    if (n >= 2 && sxx * n - sx * sx > 1e-300)
        report.dc_damp_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    else if (n >= 1 && sxx > 0.0)
        report.dc_damp_fit = sxy / sxx;
    return report;
}

}  // namespace wavefront
