#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "wavefront/potential.hpp"

namespace wavefront {

/// The two roots of lambda (lambda + c) = mu, ordered by real part,
/// then by imaginary part. Complex when c^2/4 + mu < 0.
std::pair<std::complex<double>, std::complex<double>> lambda_pair(double mu, double c);

struct ManifoldDims {
    int unstable;
    int stable;
    int centre;
};

/// Dimensions of the unstable/stable/centre subspaces (and manifolds) of an
/// equilibrium with Morse index m in dimension d at speed c.
ManifoldDims manifold_dimensions(int d, int m, double c);

/// Eigenstructure of the linearization dU/dxi = DF_{c,V}(E) U at E = (e, 0).
struct EquilibriumSpectrum {
    CriticalPoint equilibrium;
    double speed = 0.0;

    // Per Hessian eigenvalue mu_j (ascending), the root pair and the phase
    // eigenvectors (u_j, lambda_{j,+-} u_j) when the roots are real.
    std::vector<std::complex<double>> lambda_minus;
    std::vector<std::complex<double>> lambda_plus;

    // Real bases of the invariant subspaces, columns normalized and mutually
    // orthogonal across distinct j. Complex pairs contribute (Re, Im) columns.
    Mat unstable_basis;  // 2d x dim_u
    Mat stable_basis;    // 2d x dim_s
    Mat centre_basis;    // 2d x dim_c

    double beta_u = 0.0;  // min positive real part
    double beta_s = 0.0;  // max negative real part
    bool has_complex_stable = false;

    // Strong splitting (minimum with simple smallest eigenvalue only).
    bool strong_splitting_available = false;
    std::string strong_splitting_note;
    Mat strong_unstable_basis;  // 2d x (d-1)
    Mat strong_stable_basis;    // 2d x (d-1)
    Mat mild_basis;             // 2d x 2
    double beta_su = 0.0;       // lambda_{2,+}
    double beta_ss = 0.0;       // lambda_{2,-}

    int dimension() const { return equilibrium.point.size() > 0 ? static_cast<int>(equilibrium.point.size()) : 0; }
    Vec equilibrium_state() const;
};

EquilibriumSpectrum spectrum_at(const PotentialModel& model, const CriticalPoint& critical,
                                double c);

}  // namespace wavefront
