#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "wavefront/errors.hpp"
#include "wavefront/linalg.hpp"

namespace wavefront {

enum class DerivativeMode { analytic, finite_difference };

/// A potential V: R^d -> R with first and second derivatives.
///
/// Models are immutable after construction and safe to evaluate from any
/// number of threads. Subclasses either provide analytic derivatives or
/// inherit the central finite-difference fallbacks (step cbrt(eps)*(1+|u|)).
class PotentialModel {
public:
    virtual ~PotentialModel() = default;

    int dimension() const noexcept { return dimension_; }
    DerivativeMode derivative_mode() const noexcept { return mode_; }

    /// V(u). Throws EvaluationError on non-finite input or output.
    double value(const Vec& u) const;
    /// grad V(u).
    Vec gradient(const Vec& u) const;
    /// D^2 V(u), symmetrized.
    Mat hessian(const Vec& u) const;

protected:
    PotentialModel(int dimension, DerivativeMode mode) : dimension_(dimension), mode_(mode) {}

    virtual double value_impl(const Vec& u) const = 0;
    virtual Vec gradient_impl(const Vec& u) const;
    virtual Mat hessian_impl(const Vec& u) const;

    double fd_step(const Vec& u) const;

private:
    int dimension_;
    DerivativeMode mode_;
};

struct EvalTriple {
    double value;
    Vec gradient;
    Mat hessian;
};

/// Evaluates (V, grad V, D^2 V) at once, with finiteness checks.
EvalTriple eval(const PotentialModel& model, const Vec& u);

/// One term c * u_1^{e_1} * ... * u_d^{e_d} of a polynomial potential.
struct Monomial {
    std::vector<int> exponents;
    double coefficient = 0.0;
};

/// Multivariate polynomial potential with analytic derivatives. This is the
/// form the CLI ingests; closures go through FunctionPotential instead.
class PolynomialPotential final : public PotentialModel {
public:
    PolynomialPotential(int dimension, std::vector<Monomial> monomials);

    const std::vector<Monomial>& monomials() const { return monomials_; }

protected:
    double value_impl(const Vec& u) const override;
    Vec gradient_impl(const Vec& u) const override;
    Mat hessian_impl(const Vec& u) const override;

private:
    std::vector<Monomial> monomials_;
};

/// Extension point for arbitrary callables. Derivatives fall back to finite
/// differences unless supplied.
class FunctionPotential final : public PotentialModel {
public:
    using ValueFn = std::function<double(const Vec&)>;
    using GradientFn = std::function<Vec(const Vec&)>;
    using HessianFn = std::function<Mat(const Vec&)>;

    FunctionPotential(int dimension, ValueFn value, GradientFn gradient = nullptr,
                      HessianFn hessian = nullptr);

protected:
    double value_impl(const Vec& u) const override;
    Vec gradient_impl(const Vec& u) const override;
    Mat hessian_impl(const Vec& u) const override;

private:
    ValueFn value_;
    GradientFn gradient_;
    HessianFn hessian_;
};

/// Smooth scalar cutoff: 1 on [0, lo], 0 on [hi, inf), C^infinity between.
class SmoothCutoff {
public:
    SmoothCutoff(double lo, double hi);
    double operator()(double r) const;
    double derivative(double r) const;
    double second_derivative(double r) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double lo_, hi_;
};

/// W(u) = chi(|u|) V(u) + (1 - chi(|u|)) |u|^2/2 with chi = 1 on [0, R] and
/// 0 on [R+1, inf). Coincides with V inside the radius-R ball and with the
/// round quadratic past R+1, so the flow is global and all critical points
/// stay inside the ball.
class QuadraticExtension final : public PotentialModel {
public:
    QuadraticExtension(std::shared_ptr<const PotentialModel> base, double radius);

    double radius() const { return cutoff_.lo(); }
    const PotentialModel& base() const { return *base_; }

protected:
    double value_impl(const Vec& u) const override;
    Vec gradient_impl(const Vec& u) const override;
    Mat hessian_impl(const Vec& u) const override;

private:
    std::shared_ptr<const PotentialModel> base_;
    SmoothCutoff cutoff_;
};

std::shared_ptr<const PotentialModel> quadratic_extension(
    std::shared_ptr<const PotentialModel> base, double radius);

/// A non-degenerate critical point with its Hessian eigenstructure.
struct CriticalPoint {
    Vec point;
    double value = 0.0;
    int morse_index = 0;
    Vec hessian_eigenvalues;   // ascending
    Mat hessian_eigenvectors;  // orthonormal columns matching the eigenvalues
};

struct SearchBox {
    Vec lo;
    Vec hi;
};

struct CriticalPointSearchOptions {
    double newton_tol_scale = 1e-12;   // on |grad| relative to 1 + |D^2 V|
    double degeneracy_tol_scale = 1e-8;  // on min |mu| relative to spectral radius
    double dedup_radius = 1e-6;
    int max_newton_iterations = 60;
};

struct CriticalPointSearch {
    std::vector<CriticalPoint> points;  // sorted lexicographically by coordinates
    std::vector<Vec> degenerate;        // converged points with near-singular Hessian
};

/// Newton iteration from every node of a grid_density^d grid over the box.
/// Converged points are deduplicated and classified; degenerate Hessians are
/// reported separately rather than silently dropped.
CriticalPointSearch find_critical_points(const PotentialModel& model, const SearchBox& box,
                                         int grid_density,
                                         const CriticalPointSearchOptions& options = {});

/// Classifies a known critical point; throws InvalidInputError if the
/// gradient there is not small, EvaluationError on degeneracy.
CriticalPoint classify_critical_point(const PotentialModel& model, const Vec& e,
                                      const CriticalPointSearchOptions& options = {});

}  // namespace wavefront
