#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pmelab/errors.hpp"
#include "pmelab/numerics.hpp"
#include "pmelab/similarity.hpp"

namespace pmelab {

/// Exact dipole profile of the porous medium equation on the half-line.
///
/// The normalized profile is
///
///     F_1(xi) = xi^{1/m} (C - kappa xi^{(m+1)/m})_+^{1/(m-1)},
///
/// compactly supported on [0, xi1], and the general profile is obtained by
/// the moment scaling F_M(xi) = M^{1/m} F_1(xi / M^{(m-1)/(2m)}). The
/// amplitude constant C is fixed so that the first moment of F_M is M.
/// All derived constants are computed once at construction; the evaluators
/// are pure functions of the stored fields.
struct DipoleProfile {
    double m;        ///< medium exponent, > 1
    double M;        ///< first moment, > 0
    double kappa;    ///< (m-1) / (2m(m+1))
    double C;        ///< profile amplitude constant (quadrature-normalized)
    double xi1;      ///< support edge of F_1, (C/kappa)^{m/(m+1)}
    double xi_M;     ///< support edge of F_M, xi1 * M^{(m-1)/(2m)}
    double xi_bar;   ///< maximum point of F_1 (unique sign change of F_1')
    double xi_hat;   ///< linear-bound threshold in (0, xi_bar), fixed at xi_bar/2
    double K_bound;  ///< xi F_1'(xi) <= K_bound xi^{1/m} on (0, xi_hat]
    SimilarityExponents exponents;
    double xi_scale;   ///< M^{(m-1)/(2m)}, xi scale between F_1 and F_M
    double amp_scale;  ///< M^{1/m}, amplitude scale between F_1 and F_M

    bool operator==(const DipoleProfile&) const = default;
};

/// Value and one-sided derivative of a profile at a point.
///
/// derivative_finite is false where the analytic one-sided slope is
/// unbounded: at xi = 0 (slope +inf for every m > 1) and at the support
/// edge for m > 2 (slope -inf). For m = 2 the edge slope is the finite
/// kink value; for m < 2 it is 0.
struct ProfilePoint {
    double value;
    double derivative;
    bool derivative_finite;
};

namespace detail {

inline double f1_value(const DipoleProfile& p, double xi) {
    if (xi <= 0.0) return 0.0;
    const double g = p.C - p.kappa * std::pow(xi, (p.m + 1.0) / p.m);
    if (g <= 0.0) return 0.0;
    return std::pow(xi, 1.0 / p.m) * std::pow(g, 1.0 / (p.m - 1.0));
}

/// One-sided slope at the support edge: 0 for m < 2, the kink value for
/// m = 2, unbounded for m > 2.
inline ProfilePoint f1_edge_point(const DipoleProfile& p) {
    if (p.m < 2.0) return {0.0, 0.0, true};
    if (p.m == 2.0) return {0.0, -1.5 * p.kappa * p.xi1, true};
    return {0.0, -std::numeric_limits<double>::infinity(), false};
}

/// One-sided derivative of F_1 with the edge conventions of ProfilePoint.
inline ProfilePoint f1_point(const DipoleProfile& p, double xi) {
    const double m = p.m;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (xi == 0.0) return {0.0, inf, false};
    if (xi > p.xi1) return {0.0, 0.0, true};
    if (xi == p.xi1) return f1_edge_point(p);
    const double e = (m + 1.0) / m;
    const double g = p.C - p.kappa * std::pow(xi, e);
    // g can round to <= 0 just inside the edge; treat that as the edge
    if (g <= 0.0) return f1_edge_point(p);
    const double value = std::pow(xi, 1.0 / m) * std::pow(g, 1.0 / (m - 1.0));
    // F_1'(xi) = (1/m) xi^{(1-m)/m} g^{(2-m)/(m-1)} (C - xi^{(m+1)/m}/(m+1))
    const double deriv = (1.0 / m) * std::pow(xi, (1.0 - m) / m) *
                         std::pow(g, (2.0 - m) / (m - 1.0)) *
                         (p.C - std::pow(xi, e) / (m + 1.0));
    return {value, deriv, true};
}

}  // namespace detail

/// Builds the profile for a given medium exponent and first moment.
///
/// The amplitude constant comes from
///     C = (kappa^{(2m+1)/(m+1)} / I(m))^{(m^2-1)/(2m^2)},
///     I(m) = int_0^1 s^{(m+1)/m} (1 - s^{(m+1)/m})^{1/(m-1)} ds,
/// with I(m) evaluated by adaptive quadrature at relative tolerance 1e-10.
/// xi_bar is found by bisection on F_1' (single sign change in (0, xi1)).
inline DipoleProfile build_profile(double m, double M) {
    if (!(m > 1.0)) throw std::invalid_argument("build_profile: m must exceed 1");
    if (!(M > 0.0)) throw std::invalid_argument("build_profile: M must be positive");

    DipoleProfile p{};
    p.m = m;
    p.M = M;
    p.exponents = similarity_exponents(m);
    p.kappa = (m - 1.0) / (2.0 * m * (m + 1.0));

    const double e = (m + 1.0) / m;
    const double moment_integral = integrate(
        [&](double s) {
            const double se = std::pow(s, e);
            const double rest = 1.0 - se;
            if (rest <= 0.0) return 0.0;
            return se * std::pow(rest, 1.0 / (m - 1.0));
        },
        0.0, 1.0, 1e-10);
    p.C = std::pow(std::pow(p.kappa, (2.0 * m + 1.0) / (m + 1.0)) / moment_integral,
                   (m * m - 1.0) / (2.0 * m * m));
    p.xi1 = std::pow(p.C / p.kappa, m / (m + 1.0));
    p.xi_scale = std::pow(M, (m - 1.0) / (2.0 * m));
    p.amp_scale = std::pow(M, 1.0 / m);
    p.xi_M = p.xi1 * p.xi_scale;

    // F_1' changes sign exactly once in (0, xi1); bracket slightly inside
    // the support so both endpoint signs are strict.
    p.xi_bar = bisect(
        [&](double xi) { return detail::f1_point(p, xi).derivative; }, 1e-12,
        p.xi1 * (1.0 - 1e-12), 200);

    p.xi_hat = 0.5 * p.xi_bar;
    double worst = 0.0;
    constexpr int kGridPoints = 10000;
    for (int i = 1; i <= kGridPoints; ++i) {
        const double xi = p.xi_hat * static_cast<double>(i) / kGridPoints;
        const double ratio =
            xi * detail::f1_point(p, xi).derivative / std::pow(xi, 1.0 / m);
        worst = std::max(worst, ratio);
    }
    p.K_bound = 1.1 * worst;
    return p;
}

/// F_M(xi) and its one-sided derivative.
inline ProfilePoint profile_eval(const DipoleProfile& p, double xi) {
    if (xi < 0.0) throw std::invalid_argument("profile_eval: xi must be >= 0");
    ProfilePoint base = detail::f1_point(p, xi / p.xi_scale);
    const double dscale = p.amp_scale / p.xi_scale;
    return {p.amp_scale * base.value,
            base.derivative_finite ? dscale * base.derivative : base.derivative,
            base.derivative_finite};
}

/// The dipole solution D_M(x,t) = t^{-alpha} F_M(x / t^{beta}).
inline double dipole_eval(const DipoleProfile& p, double x, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("dipole_eval: t must be positive");
    if (x < 0.0) throw std::invalid_argument("dipole_eval: x must be >= 0");
    const double xi = x / std::pow(t, p.exponents.beta);
    return std::pow(t, -p.exponents.alpha) * p.amp_scale *
           detail::f1_value(p, xi / p.xi_scale);
}

/// First moment of F_M by adaptive quadrature; equals M up to the tolerance.
inline double profile_moment(const DipoleProfile& p, double rel_tol = 1e-10) {
    return integrate(
        [&](double xi) { return xi * profile_eval(p, xi).value; }, 0.0, p.xi_M,
        rel_tol);
}

/// Finite-difference residual of the profile equation
/// (F_M^m)'' + beta xi F_M' + alpha F_M at an interior point, using a central
/// second difference of step h for (F_M^m)''. O(h^2) away from 0 and xi_M.
inline double profile_ode_residual(const DipoleProfile& p, double xi, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("profile_ode_residual: h must be positive");
    if (!(xi - h > 0.0) || !(xi + h < p.xi_M))
        throw std::domain_error("profile_ode_residual: stencil leaves (0, xi_M)");
    const auto fm = [&](double z) {
        return std::pow(profile_eval(p, z).value, p.m);
    };
    const ProfilePoint at = profile_eval(p, xi);
    const double second = (fm(xi + h) - 2.0 * fm(xi) + fm(xi - h)) / (h * h);
    return second + p.exponents.beta * xi * at.derivative +
           p.exponents.alpha * at.value;
}

namespace detail {

inline void write_g17(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

}  // namespace detail

/// Writes the profile on a uniform xi grid over [0, xi_M] as CSV:
/// one '#' header line with the constants, then xi,F,Fprime rows.
inline void dump_profile(const DipoleProfile& p, std::ostream& out,
                         std::size_t points = 512) {
    if (points < 2) throw std::invalid_argument("dump_profile: need >= 2 points");
    out << "# m=";
    detail::write_g17(out, p.m);
    out << " M=";
    detail::write_g17(out, p.M);
    out << " kappa=";
    detail::write_g17(out, p.kappa);
    out << " C=";
    detail::write_g17(out, p.C);
    out << " xi1=";
    detail::write_g17(out, p.xi1);
    out << " xiM=";
    detail::write_g17(out, p.xi_M);
    out << "\n";
    out << "xi,F,Fprime\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double xi = p.xi_M * static_cast<double>(i) / (points - 1);
        const ProfilePoint pt = profile_eval(p, xi);
        detail::write_g17(out, xi);
        out << ",";
        detail::write_g17(out, pt.value);
        out << ",";
        detail::write_g17(out, pt.derivative);
        out << "\n";
    }
}

}  // namespace pmelab
