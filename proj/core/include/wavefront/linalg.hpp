#pragma once

#include <Eigen/Dense>

namespace wavefront {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
/// Eigenvectors are orthonormal columns; each is oriented so that its first
/// component above a relative threshold is positive, which makes reports
/// reproducible across runs and platforms.
struct SymmetricEigen {
    Vec values;
    Mat vectors;
};

/// Cyclic Jacobi rotations. Intended for the small dense Hessians that occur
/// here (d up to a few dozen).
SymmetricEigen symmetric_eigen(const Mat& a);

/// Thin orthonormal basis of the column span (Gram-Schmidt with pivoting).
Mat orthonormal_basis(const Mat& columns, double tol = 1e-12);

/// Orthonormal basis of the hyperplane orthogonal to n (n x (n-1) columns).
Mat orthonormal_complement(const Vec& n);

/// Relative off-diagonal asymmetry |A - A^T| / (1 + |A|).
double symmetry_defect(const Mat& a);

}  // namespace wavefront
