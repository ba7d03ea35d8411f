#include "wavefront/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace wavefront {

SymmetricEigen symmetric_eigen(const Mat& a_in) {
    const Eigen::Index n = a_in.rows();
    Mat a = 0.5 * (a_in + a_in.transpose());
    Mat v = Mat::Identity(n, n);

    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double stop = 1e-15 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += std::abs(a(p, q));
        if (off <= stop) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

    SymmetricEigen out;
    out.values = Vec(n);
    out.vectors = Mat(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values(j) = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
        out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
    }

    // Deterministic orientation: first component above threshold made positive.
    for (Eigen::Index j = 0; j < n; ++j) {
        const double big = out.vectors.col(j).cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(out.vectors(i, j)) > 1e-12 * big) {
                if (out.vectors(i, j) < 0.0) out.vectors.col(j) *= -1.0;
                break;
            }
        }
    }
    return out;
}

Mat orthonormal_basis(const Mat& columns, double tol) {
    const Eigen::Index rows = columns.rows();
    Mat q(rows, columns.cols());
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        Vec w = columns.col(j);
        const double initial = w.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < kept; ++k) w -= q.col(k).dot(w) * q.col(k);
        if (w.norm() > tol * std::max(1.0, initial)) {
            q.col(kept++) = w / w.norm();
        }
    }
    return q.leftCols(kept);
}

Mat orthonormal_complement(const Vec& n) {
    const Eigen::Index dim = n.size();
    Mat full(dim, dim);
    full.col(0) = n.normalized();
    // Fill with coordinate axes and orthonormalize; skip the axis most
    // parallel to n to keep the basis well conditioned.
    Eigen::Index skip;
    n.cwiseAbs().maxCoeff(&skip);
    Eigen::Index col = 1;
    for (Eigen::Index i = 0; i < dim && col < dim; ++i) {
        if (i == skip) continue;
        full.col(col++) = Vec::Unit(dim, i);
    }
    Mat q = orthonormal_basis(full);
    return q.rightCols(dim - 1);
}

double symmetry_defect(const Mat& a) {
    return (a - a.transpose()).cwiseAbs().maxCoeff() / (1.0 + a.cwiseAbs().maxCoeff());
}

}  // namespace wavefront
