#pragma once

#include <cmath>
#include <stdexcept>

#include "pmelab/numerics.hpp"

namespace pmelab {

/// Source-type (Barenblatt) solution of the PME on the line,
///
///     B(x, t; C) = t^{-1/(m+1)} (C - kappa xi^2)_+^{1/(m-1)},
///     xi = x / t^{1/(m+1)},
///
/// with the same kappa = (m-1)/(2m(m+1)) as the dipole profile. Evaluation
/// is centered at x0. Used as a positivity barrier: an interior translate is
/// an exact solution until its support touches x = 0.
struct BarenblattSolution {
    double m;
    double C;
    double x0;
    double kappa;

    bool operator==(const BarenblattSolution&) const = default;
};

inline BarenblattSolution make_barenblatt(double m, double C, double x0 = 0.0) {
    if (!(m > 1.0)) throw std::invalid_argument("make_barenblatt: m must exceed 1");
    if (!(C > 0.0))
        throw std::invalid_argument("make_barenblatt: C must be positive");
    return {m, C, x0, (m - 1.0) / (2.0 * m * (m + 1.0))};
}

/// Half-width of the support at time t.
inline double barenblatt_support_radius(const BarenblattSolution& b, double t) {
    if (!(t > 0.0))
        throw std::invalid_argument("barenblatt_support_radius: t must be positive");
    return std::sqrt(b.C / b.kappa) * std::pow(t, 1.0 / (b.m + 1.0));
}

inline double barenblatt_eval(const BarenblattSolution& b, double x, double t) {
    if (!(t > 0.0))
        throw std::invalid_argument("barenblatt_eval: t must be positive");
    const double scale = std::pow(t, 1.0 / (b.m + 1.0));
    const double xi = (x - b.x0) / scale;
    const double g = b.C - b.kappa * xi * xi;
    if (g <= 0.0) return 0.0;
    return std::pow(g, 1.0 / (b.m - 1.0)) / scale;
}

/// Total mass by adaptive quadrature over the support; constant in t.
inline double barenblatt_mass(const BarenblattSolution& b, double t,
                              double rel_tol = 1e-10) {
    const double r = barenblatt_support_radius(b, t);
    return integrate([&](double x) { return barenblatt_eval(b, x, t); },
                     b.x0 - r, b.x0 + r, rel_tol);
}

}  // namespace pmelab
