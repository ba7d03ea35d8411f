#pragma once

#include <memory>

#include "wavefront/potential.hpp"

namespace wavefront::testing {

inline std::shared_ptr<const PolynomialPotential> poly1(
    std::vector<std::pair<int, double>> terms) {
    std::vector<Monomial> monomials;
    for (const auto& [e, c] : terms) monomials.push_back({{e}, c});
    return std::make_shared<PolynomialPotential>(1, std::move(monomials));
}

/// V = |u|^2 / 2 in dimension d.
inline std::shared_ptr<const PolynomialPotential> make_quadratic(int d) {
    std::vector<Monomial> monomials;
    for (int i = 0; i < d; ++i) {
        Monomial m;
        m.exponents.assign(static_cast<std::size_t>(d), 0);
        m.exponents[static_cast<std::size_t>(i)] = 2;
        m.coefficient = 0.5;
        monomials.push_back(std::move(m));
    }
    return std::make_shared<PolynomialPotential>(d, std::move(monomials));
}

/// V = (u^2 - 1)^2 / 4, minima at +-1, hilltop at 0.
inline std::shared_ptr<const PolynomialPotential> make_double_well() {
    return poly1({{4, 0.25}, {2, -0.5}, {0, 0.25}});
}

/// V = u^2/2 - u^3/3: homoclinic u(xi) = (3/2) sech^2(xi/2) at the origin.
inline std::shared_ptr<const PolynomialPotential> make_fish() {
    return poly1({{2, 0.5}, {3, -1.0 / 3.0}});
}

/// V' = -u(1-u)(u-a): bistable Nagumo potential with minima at 0 and 1.
inline std::shared_ptr<const PolynomialPotential> make_nagumo(double a = 0.25) {
    return poly1({{4, 0.25}, {3, -(1.0 + a) / 3.0}, {2, a / 2.0}});
}

/// V = (u1^2 - 1)^2/4 + u2^2/2.
inline std::shared_ptr<const PolynomialPotential> make_double_well_2d() {
    std::vector<Monomial> m;
    m.push_back({{4, 0}, 0.25});
    m.push_back({{2, 0}, -0.5});
    m.push_back({{0, 0}, 0.25});
    m.push_back({{0, 2}, 0.5});
    return std::make_shared<PolynomialPotential>(2, std::move(m));
}

/// V = (mu1 u1^2 + mu2 u2^2)/2.
inline std::shared_ptr<const PolynomialPotential> make_anisotropic(double mu1, double mu2) {
    std::vector<Monomial> m;
    m.push_back({{2, 0}, 0.5 * mu1});
    m.push_back({{0, 2}, 0.5 * mu2});
    return std::make_shared<PolynomialPotential>(2, std::move(m));
}

}  // namespace wavefront::testing
