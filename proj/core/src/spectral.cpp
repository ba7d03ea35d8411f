#include "wavefront/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "wavefront/errors.hpp"

namespace wavefront {

std::pair<std::complex<double>, std::complex<double>> lambda_pair(double mu, double c) {
    const double disc = 0.25 * c * c + mu;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return {std::complex<double>(-0.5 * c - root, 0.0),
                std::complex<double>(-0.5 * c + root, 0.0)};
    }
    const double omega = std::sqrt(-disc);
    return {std::complex<double>(-0.5 * c, -omega), std::complex<double>(-0.5 * c, omega)};
}

ManifoldDims manifold_dimensions(int d, int m, double c) {
    if (m < 0 || m > d) throw InvalidInputError("Morse index must lie in [0, d]");
    if (c < 0.0) throw InvalidInputError("speed must be nonnegative");
    if (c == 0.0) return {d - m, d - m, 2 * m};
    return {d - m, d + m, 0};
}

Vec EquilibriumSpectrum::equilibrium_state() const {
    const Eigen::Index d = equilibrium.point.size();
    Vec e = Vec::Zero(2 * d);
    e.head(d) = equilibrium.point;
    return e;
}

namespace {

Vec phase_vector(const Vec& u_j, double lambda) {
    const Eigen::Index d = u_j.size();
    Vec w(2 * d);
    w.head(d) = u_j;
    w.tail(d) = lambda * u_j;
    return w.normalized();
}

}  // namespace

EquilibriumSpectrum spectrum_at(const PotentialModel& model, const CriticalPoint& critical,
                                double c) {
    const int d = model.dimension();
    if (critical.hessian_eigenvalues.size() != d)
        throw InvalidInputError("spectrum_at: critical point missing eigenstructure");
    if (c < 0.0) throw InvalidInputError("spectrum_at: speed must be nonnegative");

    EquilibriumSpectrum sp;
    sp.equilibrium = critical;
    sp.speed = c;

    const Vec& mu = critical.hessian_eigenvalues;
    const Mat& uvec = critical.hessian_eigenvectors;

    std::vector<Vec> unstable, stable, centre;
    double beta_u = std::numeric_limits<double>::infinity();
    double beta_s = -std::numeric_limits<double>::infinity();

    for (int j = 0; j < d; ++j) {
        auto [lm, lp] = lambda_pair(mu(j), c);
        sp.lambda_minus.push_back(lm);
        sp.lambda_plus.push_back(lp);
        const Vec uj = uvec.col(j);

        if (lm.imag() == 0.0) {
            for (double lambda : {lm.real(), lp.real()}) {
                Vec w = phase_vector(uj, lambda);
                if (lambda > 0.0) {
                    unstable.push_back(w);
                    beta_u = std::min(beta_u, lambda);
                } else if (lambda < 0.0) {
                    stable.push_back(w);
                    beta_s = std::max(beta_s, lambda);
                } else {
                    centre.push_back(w);
                }
            }
        } else {
            // Complex pair: real/imaginary parts span the invariant plane.
            const Eigen::Index dd = uj.size();
            Vec re(2 * dd), im(2 * dd);
            re.head(dd) = uj;
            re.tail(dd) = lp.real() * uj;
            im.head(dd) = Vec::Zero(dd);
            im.tail(dd) = lp.imag() * uj;
            re.normalize();
            im.normalize();
            if (lp.real() > 0.0) {
                unstable.push_back(re);
                unstable.push_back(im);
                beta_u = std::min(beta_u, lp.real());
            } else if (lp.real() < 0.0) {
                stable.push_back(re);
                stable.push_back(im);
                beta_s = std::max(beta_s, lp.real());
                sp.has_complex_stable = true;
            } else {
                centre.push_back(re);
                centre.push_back(im);
            }
        }
    }

    auto to_mat = [d](const std::vector<Vec>& cols) {
        Mat m(2 * d, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
        return m;
    };
    sp.unstable_basis = to_mat(unstable);
    sp.stable_basis = to_mat(stable);
    sp.centre_basis = to_mat(centre);
    sp.beta_u = unstable.empty() ? 0.0 : beta_u;
    sp.beta_s = stable.empty() ? 0.0 : beta_s;

    const ManifoldDims dims = manifold_dimensions(d, critical.morse_index, c);
    if (sp.unstable_basis.cols() != dims.unstable || sp.stable_basis.cols() != dims.stable ||
        sp.centre_basis.cols() != dims.centre)
        throw Error("spectrum_at: subspace dimensions disagree with the Morse index table");

    // Strong splitting: defined at a minimum whose smallest Hessian
    // eigenvalue is simple (and real rates on the mild pair).
    if (critical.morse_index != 0) {
        sp.strong_splitting_note = "not a minimum";
    } else if (d >= 2 && !(mu(0) < mu(1))) {
        sp.strong_splitting_note = "smallest Hessian eigenvalue is not simple";
    } else if (d < 2) {
        sp.strong_splitting_note = "no strong directions in dimension 1";
    } else if (sp.lambda_minus[0].imag() != 0.0) {
        sp.strong_splitting_note = "mild pair is complex (spiral approach)";
    } else {
        sp.strong_splitting_available = true;
        Mat su(2 * d, d - 1), ss(2 * d, d - 1);
        for (int j = 1; j < d; ++j) {
            su.col(j - 1) = phase_vector(uvec.col(j), sp.lambda_plus[static_cast<std::size_t>(j)].real());
            ss.col(j - 1) = phase_vector(uvec.col(j), sp.lambda_minus[static_cast<std::size_t>(j)].real());
        }
        sp.strong_unstable_basis = su;
        sp.strong_stable_basis = ss;
        sp.mild_basis = Mat(2 * d, 2);
        sp.mild_basis.col(0) = phase_vector(uvec.col(0), sp.lambda_minus[0].real());
        sp.mild_basis.col(1) = phase_vector(uvec.col(0), sp.lambda_plus[0].real());
        sp.beta_su = sp.lambda_plus[1].real();
        sp.beta_ss = sp.lambda_minus[1].real();
    }
    return sp;
}

}  // namespace wavefront
