#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include "pmelab/errors.hpp"

namespace pmelab {

/// Compensated (Kahan) accumulator. Keeps discrete mass/moment sums
/// meaningful at the 1e-10 level over 1e5+ nodes.
class KahanSum {
public:
    void add(double x) {
        double y = x - carry_;
        double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth,
                            int max_depth) {
    const double mid = 0.5 * (a + b);
    const double lm = 0.5 * (a + mid);
    const double rm = 0.5 * (mid + b);
    // Interval collapsed to floating-point resolution: the remaining true
    // contribution is below representable refinement, keep the estimate.
    if (lm <= a || mid <= lm || rm <= mid || b <= rm) return whole;
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb);
    const double s2 = left + right;
    const double err = (s2 - whole) / 15.0;
    if (std::abs(err) <= tol) return s2 + err;
    if (depth >= max_depth)
        throw numeric_error("adaptive quadrature did not converge on [" +
                            std::to_string(a) + ", " + std::to_string(b) +
                            "], error estimate " + std::to_string(err));
    return adaptive_simpson_rec(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth + 1,
                                max_depth) +
           adaptive_simpson_rec(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth + 1,
                                max_depth);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to relative tolerance rel_tol.
///
/// Subdivision keeps doubling until two successive refinements agree, which
/// copes with the algebraic endpoint behavior of the profile integrands
/// (the recursion bottoms out at floating-point resolution near the
/// singular endpoint, where the remaining tail is negligible).
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol,
                 int max_depth = 64) {
    if (!(b > a)) {
        if (a == b) return 0.0;
        throw std::invalid_argument("integrate: requires a <= b");
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double scale = std::abs(whole);
    if (scale == 0.0)
        scale = (std::abs(fa) + std::abs(fm) + std::abs(fb)) * (b - a);
    if (scale == 0.0) scale = std::numeric_limits<double>::min();
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale,
                                        0, max_depth);
}

/// Bisection on a sign change of f over [lo, hi]. Requires f(lo) and f(hi)
/// of opposite (strict) signs. Stops when the bracket collapses to adjacent
/// doubles or after max_iter halvings.
template <typename F>
double bisect(const F& f, double lo, double hi, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw numeric_error("bisect: no sign change on [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace pmelab
