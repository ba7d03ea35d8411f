#pragma once

#include <memory>

#include "wavefront/dynamics.hpp"
#include "wavefront/spectral.hpp"

namespace wavefront {

enum class ManifoldKind { unstable, stable, strong_unstable, strong_stable };

enum class ManifoldOrder { linear, refined };

struct ManifoldOptions {
    double radius = 0.0;  // 0 -> largest radius meeting the nonlinearity budget
    ManifoldOrder order = ManifoldOrder::refined;
    double kappa = 16.0;  // refined order seeds at radius r / kappa
    double nonlinearity_budget = 3e-2;
    double integrator_tol = 1e-12;
};

/// Local (strongly) stable/unstable manifold of an equilibrium, represented
/// as a graph over its tangent subspace. Linear order uses the tangent plane
/// itself (exact to first order since the graph differential vanishes at E);
/// refined order seeds at radius r/kappa and transports boundary points with
/// the flow, shrinking the graph error from O(r^2) to O((r/kappa)^2).
class LocalManifold {
public:
    static LocalManifold build(std::shared_ptr<const PotentialModel> model,
                               const EquilibriumSpectrum& spectrum, ManifoldKind kind,
                               const ManifoldOptions& options = {});

    ManifoldKind kind() const { return kind_; }
    ManifoldOrder order() const { return order_; }
    double radius() const { return radius_; }
    double kappa() const { return kappa_; }
    int tangent_dimension() const { return static_cast<int>(basis_.cols()); }
    int boundary_parameter_dimension() const { return tangent_dimension() - 1; }
    const Mat& tangent_basis() const { return basis_; }
    const EquilibriumSpectrum& spectrum() const { return spectrum_; }
    const PotentialModel& model() const { return *model_; }
    Vec equilibrium_state() const { return spectrum_.equilibrium_state(); }

    /// Boundary point for tangent coordinate b (rescaled to |b| = radius).
    PhasePoint sample_boundary(const Vec& b) const;

    /// Manifold point on the ray of b at an interior radius rho <= radius().
    PhasePoint sample_at_radius(const Vec& b, double rho) const;

    /// Distance from U to the manifold sheet at U's tangent coordinate.
    double distance_to(const PhasePoint& U) const;

    struct Membership {
        bool member = false;
        double terminal_distance = 0.0;
        double fitted_rate = 0.0;  // d log|U - E| / d xi over the window
    };

    /// Integrates U in the contracting direction for |window| time units and
    /// checks that the orbit stays in the box and approaches E. Strong kinds
    /// additionally require decay strictly faster than the mild rate.
    Membership membership_test(const PhasePoint& U, double window) const;

    /// True when the contracting direction of this kind is forward time.
    bool contracts_forward() const {
        return kind_ == ManifoldKind::stable || kind_ == ManifoldKind::strong_stable;
    }

private:
    LocalManifold() = default;

    std::shared_ptr<const PotentialModel> model_;
    EquilibriumSpectrum spectrum_;
    ManifoldKind kind_ = ManifoldKind::unstable;
    ManifoldOrder order_ = ManifoldOrder::refined;
    double radius_ = 0.0;
    double kappa_ = 16.0;
    double integrator_tol_ = 1e-12;
    Mat basis_;  // 2d x n, orthonormal
};

/// Worst nonlinearity ratio |grad V(e + du) - D^2V(e) du| / |D^2V(e) du|
/// over a deterministic set of boundary directions at the given radius.
double nonlinearity_ratio(const PotentialModel& model, const EquilibriumSpectrum& spectrum,
                          const Mat& tangent_basis, double radius);

/// Largest radius meeting the budget, found by bisection.
double suggest_radius(const PotentialModel& model, const EquilibriumSpectrum& spectrum,
                      const Mat& tangent_basis, double budget);

}  // namespace wavefront
