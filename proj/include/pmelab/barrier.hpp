#pragma once

#include <cmath>
#include <stdexcept>

#include "pmelab/dipole.hpp"

namespace pmelab {

enum class BarrierKind { super, sub };

/// Shifted self-similar super/sub-solution for the near-field comparison:
///
///     super:  V(x,t) = k(t) t^{-alpha} F_M((x + a) / t^beta),
///     sub:    v(x,t) = c(t) t^{-alpha} F_M((x - a) / t^beta),
///
/// where the time factor solves the Bernoulli equation
/// t k'(t) = -alpha (k^m - k) (super, k0 > 1, decreasing to 1) or
/// t c'(t) = +alpha (c - c^m) (sub, c0 in (0,1), increasing to 1).
struct Barrier {
    BarrierKind kind;
    DipoleProfile profile;
    double a;        ///< spatial shift, in (0, 1)
    double T;        ///< start time, > 0
    double factor0;  ///< k(T) or c(T)
};

inline Barrier make_barrier(BarrierKind kind, const DipoleProfile& profile,
                            double a, double T, double factor0) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("make_barrier: a must be in (0, 1)");
    if (!(T > 0.0)) throw std::invalid_argument("make_barrier: T must be positive");
    if (kind == BarrierKind::super && !(factor0 > 1.0))
        throw std::invalid_argument("make_barrier: super requires factor0 > 1");
    if (kind == BarrierKind::sub && !(factor0 > 0.0 && factor0 < 1.0))
        throw std::invalid_argument("make_barrier: sub requires factor0 in (0, 1)");
    return {kind, profile, a, T, factor0};
}

/// Closed-form time factor. With z = factor^{1-m} the Bernoulli equation is
/// linear, and both kinds collapse to
///
///     factor(t) = [1 + (factor0^{1-m} - 1) (T/t)^{(m-1)/m}]^{-1/(m-1)}.
///
/// The ODE itself is only stepped in test oracles; the barrier uses this
/// closed form so evaluation is O(1) per point with no accumulation error.
inline double barrier_factor(const Barrier& b, double t) {
    if (t < b.T) throw std::domain_error("barrier_factor: t must be >= T");
    const double m = b.profile.m;
    const double z0 = std::pow(b.factor0, 1.0 - m);
    const double z = 1.0 + (z0 - 1.0) * std::pow(b.T / t, (m - 1.0) / m);
    return std::pow(z, -1.0 / (m - 1.0));
}

inline double barrier_eval(const Barrier& b, double x, double t) {
    if (t < b.T) throw std::domain_error("barrier_eval: t must be >= T");
    if (x < 0.0) throw std::invalid_argument("barrier_eval: x must be >= 0");
    const double tb = std::pow(t, b.profile.exponents.beta);
    const double xi =
        (b.kind == BarrierKind::super) ? (x + b.a) / tb : (x - b.a) / tb;
    if (xi <= 0.0) return 0.0;  // sub kind vanishes at and left of the shift
    return barrier_factor(b, t) * std::pow(t, -b.profile.exponents.alpha) *
           profile_eval(b.profile, xi).value;
}

/// Closed-form PDE residual of the barrier, via the profile equation:
///
///     super:  V_t - (V^m)_xx = +t^{-alpha-1} (k^m - k) beta xi F_M'(xi),
///     sub:    v_t - (v^m)_xx = -t^{-alpha-1} (c - c^m) beta xi F_M'(xi),
///
/// nonnegative (super) / nonpositive (sub) wherever F_M' > 0. The shifted
/// similarity variable must lie in (0, xi_M); for the sub barrier just right
/// of the shift, xi is clamped to 1e-12 to dodge the xi^{1/m - 1} blowup in
/// the derivative factor.
inline double barrier_residual(const Barrier& b, double x, double t) {
    if (t < b.T) throw std::domain_error("barrier_residual: t must be >= T");
    const auto& e = b.profile.exponents;
    const double tb = std::pow(t, e.beta);
    double xi = (b.kind == BarrierKind::super) ? (x + b.a) / tb : (x - b.a) / tb;
    if (b.kind == BarrierKind::sub && xi >= 0.0 && xi < 1e-12) xi = 1e-12;
    if (!(xi > 0.0) || !(xi < b.profile.xi_M))
        throw std::domain_error("barrier_residual: xi outside (0, xi_M)");
    const ProfilePoint pt = profile_eval(b.profile, xi);
    const double factor = barrier_factor(b, t);
    // factor^m - factor is > 0 for super (k > 1) and < 0 for sub (c < 1),
    // which carries the sign of both formulas at once.
    const double drive = std::pow(factor, b.profile.m) - factor;
    return std::pow(t, -e.alpha - 1.0) * drive * e.beta * xi * pt.derivative;
}

/// Admissible comparison region {(x, t) : t >= T, a < x < delta t^beta}.
/// a = 0 gives the supersolution region, a > 0 the subsolution one.
struct Region {
    double delta;
    double T;
    double a;

    bool contains(double x, double t, double beta) const {
        return t >= T && x > a && x < delta * std::pow(t, beta);
    }
};

struct RegionParams {
    double delta_bar;
    double T_bar;
};

/// Width and start time below/after which the barriers have the right
/// residual sign: delta_bar realizes the strict bound
/// delta < xi_bar M^{(m-1)/(2m)} / 2 with a fixed 0.9 factor, and
/// T_bar = (1/delta_bar)^{1/beta}.
inline RegionParams region_params(const DipoleProfile& p) {
    const double delta_bar = 0.9 * 0.5 * p.xi_bar * p.xi_scale;
    const double T_bar = std::pow(delta_bar, -1.0 / p.exponents.beta);
    return {delta_bar, T_bar};
}

/// Matching constant C_delta = 1 / F_M(delta).
inline double comparison_constant(const DipoleProfile& p, double delta) {
    const double f = profile_eval(p, delta).value;
    if (!(f > 0.0))
        throw std::invalid_argument("comparison_constant: F_M(delta) must be > 0");
    return 1.0 / f;
}

}  // namespace pmelab
