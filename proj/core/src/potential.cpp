#include "wavefront/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavefront/errors.hpp"
#include "wavefront/parallel.hpp"

namespace wavefront {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

void require_finite_input(const Vec& u, int dimension) {
    if (u.size() != dimension)
        throw InvalidInputError("potential evaluated with wrong dimension");
    if (!all_finite(u)) throw EvaluationError("potential evaluated at non-finite point");
}

}  // namespace

double PotentialModel::fd_step(const Vec& u) const {
    static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
    return cbrt_eps * (1.0 + u.norm());
}

double PotentialModel::value(const Vec& u) const {
    require_finite_input(u, dimension_);
    const double v = value_impl(u);
    if (!std::isfinite(v)) throw EvaluationError("potential value is not finite");
    return v;
}

Vec PotentialModel::gradient(const Vec& u) const {
    require_finite_input(u, dimension_);
    Vec g = gradient_impl(u);
    if (!all_finite(g)) throw EvaluationError("potential gradient is not finite");
    return g;
}

Mat PotentialModel::hessian(const Vec& u) const {
    require_finite_input(u, dimension_);
    Mat h = hessian_impl(u);
    if (!h.allFinite()) throw EvaluationError("potential hessian is not finite");
    return 0.5 * (h + h.transpose());
}

Vec PotentialModel::gradient_impl(const Vec& u) const {
    const double h = fd_step(u);
    Vec g(dimension_);
    Vec up = u, dn = u;
    for (int i = 0; i < dimension_; ++i) {
        up(i) = u(i) + h;
        dn(i) = u(i) - h;
        g(i) = (value_impl(up) - value_impl(dn)) / (2.0 * h);
        up(i) = u(i);
        dn(i) = u(i);
    }
    return g;
}

Mat PotentialModel::hessian_impl(const Vec& u) const {
    // Symmetric second differences of the value; the cross terms use the
    // four-point stencil which is symmetric by construction.
    const double h = std::sqrt(fd_step(u));  // h ~ eps^(1/6), optimal for 2nd derivatives
    Mat out(dimension_, dimension_);
    const double f0 = value_impl(u);
    Vec w = u;
    for (int i = 0; i < dimension_; ++i) {
        w(i) = u(i) + h;
        const double fp = value_impl(w);
        w(i) = u(i) - h;
        const double fm = value_impl(w);
        w(i) = u(i);
        out(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < dimension_; ++i) {
        for (int j = i + 1; j < dimension_; ++j) {
            w(i) = u(i) + h;
            w(j) = u(j) + h;
            const double fpp = value_impl(w);
            w(j) = u(j) - h;
            const double fpm = value_impl(w);
            w(i) = u(i) - h;
            const double fmm = value_impl(w);
            w(j) = u(j) + h;
            const double fmp = value_impl(w);
            w(i) = u(i);
            w(j) = u(j);
            out(i, j) = out(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    return out;
}

EvalTriple eval(const PotentialModel& model, const Vec& u) {
    return EvalTriple{model.value(u), model.gradient(u), model.hessian(u)};
}

// ---------------------------------------------------------------------------
// PolynomialPotential

PolynomialPotential::PolynomialPotential(int dimension, std::vector<Monomial> monomials)
    : PotentialModel(dimension, DerivativeMode::analytic), monomials_(std::move(monomials)) {
    for (const auto& m : monomials_) {
        if (static_cast<int>(m.exponents.size()) != dimension)
            throw InvalidInputError("monomial exponent list does not match dimension");
        for (int e : m.exponents)
            if (e < 0) throw InvalidInputError("monomial exponents must be nonnegative");
    }
}

namespace {

double int_pow(double x, int n) {
    double r = 1.0;
    while (n-- > 0) r *= x;
    return r;
}

}  // namespace

double PolynomialPotential::value_impl(const Vec& u) const {
    double total = 0.0;
    for (const auto& m : monomials_) {
        double term = m.coefficient;
        for (int i = 0; i < dimension(); ++i) term *= int_pow(u(i), m.exponents[i]);
        total += term;
    }
    return total;
}

Vec PolynomialPotential::gradient_impl(const Vec& u) const {
    Vec g = Vec::Zero(dimension());
    for (const auto& m : monomials_) {
        for (int k = 0; k < dimension(); ++k) {
            const int ek = m.exponents[k];
            if (ek == 0) continue;
            double term = m.coefficient * ek * int_pow(u(k), ek - 1);
            for (int i = 0; i < dimension(); ++i)
                if (i != k) term *= int_pow(u(i), m.exponents[i]);
            g(k) += term;
        }
    }
    return g;
}

Mat PolynomialPotential::hessian_impl(const Vec& u) const {
    Mat h = Mat::Zero(dimension(), dimension());
    for (const auto& m : monomials_) {
        for (int k = 0; k < dimension(); ++k) {
            const int ek = m.exponents[k];
            if (ek >= 2) {
                double term = m.coefficient * ek * (ek - 1) * int_pow(u(k), ek - 2);
                for (int i = 0; i < dimension(); ++i)
                    if (i != k) term *= int_pow(u(i), m.exponents[i]);
                h(k, k) += term;
            }
            for (int l = k + 1; l < dimension(); ++l) {
                const int el = m.exponents[l];
                if (ek == 0 || el == 0) continue;
                double term = m.coefficient * ek * el * int_pow(u(k), ek - 1) * int_pow(u(l), el - 1);
                for (int i = 0; i < dimension(); ++i)
                    if (i != k && i != l) term *= int_pow(u(i), m.exponents[i]);
                h(k, l) += term;
                h(l, k) += term;
            }
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// FunctionPotential

FunctionPotential::FunctionPotential(int dimension, ValueFn value, GradientFn gradient,
                                     HessianFn hessian)
    : PotentialModel(dimension, gradient && hessian ? DerivativeMode::analytic
                                                    : DerivativeMode::finite_difference),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
    if (!value_) throw InvalidInputError("FunctionPotential needs a value callable");
}

double FunctionPotential::value_impl(const Vec& u) const { return value_(u); }

Vec FunctionPotential::gradient_impl(const Vec& u) const {
    return gradient_ ? gradient_(u) : PotentialModel::gradient_impl(u);
}

Mat FunctionPotential::hessian_impl(const Vec& u) const {
    if (hessian_) return hessian_(u);
    if (gradient_) {
        // Central differences of the analytic gradient.
        const double h = fd_step(u);
        Mat out(dimension(), dimension());
        Vec w = u;
        for (int i = 0; i < dimension(); ++i) {
            w(i) = u(i) + h;
            const Vec gp = gradient_(w);
            w(i) = u(i) - h;
            const Vec gm = gradient_(w);
            w(i) = u(i);
            out.col(i) = (gp - gm) / (2.0 * h);
        }
        return out;
    }
    return PotentialModel::hessian_impl(u);
}

// ---------------------------------------------------------------------------
// SmoothCutoff and QuadraticExtension

namespace {

// h(x) = exp(-1/x) for x > 0, 0 otherwise; C^infinity on R.
double bump_h(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double bump_h1(double x) { return x > 0.0 ? bump_h(x) / (x * x) : 0.0; }
double bump_h2(double x) {
    return x > 0.0 ? bump_h(x) * (1.0 / (x * x * x * x) - 2.0 / (x * x * x)) : 0.0;
}

}  // namespace

SmoothCutoff::SmoothCutoff(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo >= 0.0) || !(hi > lo)) throw InvalidInputError("cutoff needs 0 <= lo < hi");
}

double SmoothCutoff::operator()(double r) const {
    if (r <= lo_) return 1.0;
    if (r >= hi_) return 0.0;
    const double p = bump_h(hi_ - r);
    const double q = bump_h(r - lo_);
    return p / (p + q);
}

double SmoothCutoff::derivative(double r) const {
    if (r <= lo_ || r >= hi_) return 0.0;
    const double p = bump_h(hi_ - r), q = bump_h(r - lo_);
    const double dp = -bump_h1(hi_ - r), dq = bump_h1(r - lo_);
    const double s = p + q;
    return (dp * q - p * dq) / (s * s);
}

double SmoothCutoff::second_derivative(double r) const {
    if (r <= lo_ || r >= hi_) return 0.0;
    const double p = bump_h(hi_ - r), q = bump_h(r - lo_);
    const double dp = -bump_h1(hi_ - r), dq = bump_h1(r - lo_);
    const double d2p = bump_h2(hi_ - r), d2q = bump_h2(r - lo_);
    const double s = p + q, ds = dp + dq;
    const double num = dp * q - p * dq;           // chi' = num / s^2
    const double dnum = d2p * q - p * d2q;        // cross terms cancel
    return (dnum * s - 2.0 * num * ds) / (s * s * s);
}

QuadraticExtension::QuadraticExtension(std::shared_ptr<const PotentialModel> base, double radius)
    : PotentialModel(base->dimension(), base->derivative_mode()),
      base_(std::move(base)),
      cutoff_(radius, radius + 1.0) {
    if (!(radius > 0.0)) throw InvalidInputError("quadratic extension radius must be positive");
}

double QuadraticExtension::value_impl(const Vec& u) const {
    const double r = u.norm();
    if (r <= cutoff_.lo()) return base_->value(u);
    const double quad = 0.5 * u.squaredNorm();
    if (r >= cutoff_.hi()) return quad;
    const double chi = cutoff_(r);
    return chi * base_->value(u) + (1.0 - chi) * quad;
}

Vec QuadraticExtension::gradient_impl(const Vec& u) const {
    const double r = u.norm();
    if (r <= cutoff_.lo()) return base_->gradient(u);
    if (r >= cutoff_.hi()) return u;
    const double chi = cutoff_(r);
    const double dchi = cutoff_.derivative(r);
    const Vec n = u / r;
    const double diff = base_->value(u) - 0.5 * u.squaredNorm();
    // W = q + chi * (V - q) with q = |u|^2/2.
    return u + dchi * diff * n + chi * (base_->gradient(u) - u);
}

Mat QuadraticExtension::hessian_impl(const Vec& u) const {
    const double r = u.norm();
    if (r <= cutoff_.lo()) return base_->hessian(u);
    const Mat id = Mat::Identity(dimension(), dimension());
    if (r >= cutoff_.hi()) return id;
    const double chi = cutoff_(r);
    const double dchi = cutoff_.derivative(r);
    const double d2chi = cutoff_.second_derivative(r);
    const Vec n = u / r;
    const double diff = base_->value(u) - 0.5 * u.squaredNorm();
    const Vec gdiff = base_->gradient(u) - u;
    const Mat hdiff = base_->hessian(u) - id;
    Mat out = id + chi * hdiff;
    out += dchi * (n * gdiff.transpose() + gdiff * n.transpose());
    out += (d2chi * (n * n.transpose()) + (dchi / r) * (id - n * n.transpose())) * diff;
    return out;
}

std::shared_ptr<const PotentialModel> quadratic_extension(
    std::shared_ptr<const PotentialModel> base, double radius) {
    return std::make_shared<QuadraticExtension>(std::move(base), radius);
}

// ---------------------------------------------------------------------------
// Critical point search

namespace {

struct NewtonOutcome {
    bool converged = false;
    Vec point;
};

NewtonOutcome newton_from(const PotentialModel& model, Vec x, const SearchBox& box,
                          const CriticalPointSearchOptions& opt) {
    const int d = model.dimension();
    // Allow iterates to wander a bit outside the box before giving up.
    Vec margin = 0.5 * (box.hi - box.lo);
    const Vec lo = box.lo - margin, hi = box.hi + margin;

    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_newton_iterations; ++it) {
        for (int i = 0; i < d; ++i)
            if (x(i) < lo(i) || x(i) > hi(i)) return {};
        Vec g;
        Mat h;
        try {
            g = model.gradient(x);
            h = model.hessian(x);
        } catch (const EvaluationError&) {
            return {};
        }
        const double hnorm = h.cwiseAbs().rowwise().sum().maxCoeff();
        // The step criterion keeps linearly-stalling iterations (degenerate
        // Hessians) running until they actually settle, instead of stopping
        // at a spurious scale where the gradient test already passes.
        if (g.norm() <= opt.newton_tol_scale * (1.0 + hnorm) &&
            last_step <= 1e-9 * (1.0 + x.norm()))
            return {true, x};

        Eigen::FullPivLU<Mat> lu(h);
        Vec step;
        if (!lu.isInvertible()) {
            // Tikhonov nudge to get past flat saddles of the iteration.
            Mat hr = h + 1e-10 * (1.0 + hnorm) * Mat::Identity(d, d);
            step = hr.fullPivLu().solve(g);
        } else {
            step = lu.solve(g);
        }
        const double max_step = margin.norm() + 1.0;
        if (step.norm() > max_step) step *= max_step / step.norm();
        x -= step;
        last_step = step.norm();
    }
    return {};
}

}  // namespace

CriticalPoint classify_critical_point(const PotentialModel& model, const Vec& e,
                                      const CriticalPointSearchOptions& options) {
    const Mat h = model.hessian(e);
    const double hnorm = h.cwiseAbs().rowwise().sum().maxCoeff();
    const Vec g = model.gradient(e);
    if (g.norm() > 1e3 * options.newton_tol_scale * (1.0 + hnorm))
        throw InvalidInputError("classify_critical_point called away from a critical point");

    SymmetricEigen eig = symmetric_eigen(h);
    const double spectral_radius = eig.values.cwiseAbs().maxCoeff();
    // The unit floor catches Hessians that vanish altogether (pure quartic
    // wells), where a purely relative test would pass vacuously.
    const double degeneracy_tol = options.degeneracy_tol_scale * (1.0 + spectral_radius);
    if (eig.values.cwiseAbs().minCoeff() <= degeneracy_tol)
        throw EvaluationError("degenerate critical point");

    CriticalPoint cp;
    cp.point = e;
    cp.value = model.value(e);
    cp.hessian_eigenvalues = eig.values;
    cp.hessian_eigenvectors = eig.vectors;
    cp.morse_index = static_cast<int>((eig.values.array() < 0.0).count());
    return cp;
}

CriticalPointSearch find_critical_points(const PotentialModel& model, const SearchBox& box,
                                         int grid_density,
                                         const CriticalPointSearchOptions& options) {
    const int d = model.dimension();
    if (box.lo.size() != d || box.hi.size() != d)
        throw InvalidInputError("search box dimension mismatch");
    if (grid_density < 2) throw InvalidInputError("grid_density must be at least 2");
    for (int i = 0; i < d; ++i)
        if (!(box.lo(i) < box.hi(i)) || !std::isfinite(box.lo(i)) || !std::isfinite(box.hi(i)))
            throw InvalidInputError("search box must be bounded with lo < hi");

    std::size_t seeds = 1;
    for (int i = 0; i < d; ++i) seeds *= static_cast<std::size_t>(grid_density);

    std::vector<NewtonOutcome> outcomes(seeds);
    parallel_for(seeds, [&](std::size_t flat) {
        Vec x(d);
        std::size_t rest = flat;
        for (int i = 0; i < d; ++i) {
            const auto k = rest % static_cast<std::size_t>(grid_density);
            rest /= static_cast<std::size_t>(grid_density);
            x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * (static_cast<double>(k) + 0.5) /
                                   static_cast<double>(grid_density);
        }
        outcomes[flat] = newton_from(model, x, box, options);
    });

    // Deduplicate sequentially in seed order, then sort for determinism.
    std::vector<Vec> found;
    for (const auto& o : outcomes) {
        if (!o.converged) continue;
        bool fresh = true;
        for (const auto& p : found)
            if ((p - o.point).norm() <= options.dedup_radius) {
                fresh = false;
                break;
            }
        if (fresh) found.push_back(o.point);
    }

    auto lex_less = [](const Vec& a, const Vec& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a(i) < b(i)) return true;
            if (a(i) > b(i)) return false;
        }
        return false;
    };
    std::sort(found.begin(), found.end(), lex_less);

    CriticalPointSearch out;
    for (const auto& p : found) {
        try {
            out.points.push_back(classify_critical_point(model, p, options));
        } catch (const EvaluationError&) {
            out.degenerate.push_back(p);
        }
    }
    return out;
}

}  // namespace wavefront
