#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmelab/barrier.hpp"
#include "pmelab/dipole.hpp"
#include "pmelab/snapshot_io.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

namespace detail {

/// The sup norms below range over all of R_+; beyond both supports the
/// difference vanishes, so restriction to the grid is exact provided the
/// domain contains the dipole support. Asserted here.
inline void require_covering_domain(const SolverState& s, const DipoleProfile& p) {
    const double edge = p.xi_M * std::pow(s.t, p.exponents.beta);
    if (s.grid.length() < edge)
        throw std::domain_error(
            "error metric: domain does not contain the dipole support (L = " +
            std::to_string(s.grid.length()) + " < " + std::to_string(edge) + ")");
}

}  // namespace detail

/// Far-field error t^alpha sup_x |u - D_M| over the grid nodes.
inline double far_field_error(const SolverState& s, const DipoleProfile& p) {
    if (!(s.t > 0.0)) throw std::domain_error("far_field_error: state time <= 0");
    detail::require_covering_domain(s, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.grid.n; ++i)
        worst = std::max(worst, std::abs(s.u[i] - dipole_eval(p, s.grid.x(i), s.t)));
    return std::pow(s.t, p.exponents.alpha) * worst;
}

struct NearFieldError {
    double e_near;        ///< absolute weighted sup
    double e_signed_sup;  ///< signed weighted sup
    double e_signed_inf;  ///< signed weighted inf
};

/// Weighted near-field error: extrema over nodes of
/// t^{alpha + beta/m} (u - D_M) / (1 + x)^{1/m}.
inline NearFieldError near_field_error(const SolverState& s,
                                       const DipoleProfile& p) {
    if (!(s.t > 0.0)) throw std::domain_error("near_field_error: state time <= 0");
    detail::require_covering_domain(s, p);
    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.grid.n; ++i) {
        const double x = s.grid.x(i);
        const double d = (s.u[i] - dipole_eval(p, x, s.t)) /
                         std::pow(1.0 + x, 1.0 / p.m);
        sup = std::max(sup, d);
        inf = std::min(inf, d);
    }
    const double scale = std::pow(s.t, p.exponents.near_field());
    return {scale * std::max(std::abs(sup), std::abs(inf)), scale * sup,
            scale * inf};
}

/// Near-field amplitude A with the moment exponent (m+1)/(2m^2), consistent
/// with the profile bound F_M(xi) <= C^{1/(m-1)} M^{(m+1)/(2m^2)} xi^{1/m}.
inline double near_field_amplitude(const DipoleProfile& p) {
    return std::pow(p.C, 1.0 / (p.m - 1.0)) *
           std::pow(p.M, (p.m + 1.0) / (2.0 * p.m * p.m));
}

/// Alternative amplitude with the exponent 2/(m+1) quoted in prose; kept so
/// the data can adjudicate which one matches (see near_field_profile_errors).
inline double near_field_amplitude_alt(const DipoleProfile& p) {
    return std::pow(p.C, 1.0 / (p.m - 1.0)) * std::pow(p.M, 2.0 / (p.m + 1.0));
}

/// sup over nodes x <= K of |t^{alpha+beta/m} u - A x^{1/m}|.
inline double near_field_profile_error(const SolverState& s,
                                       const DipoleProfile& p, double K,
                                       double amplitude) {
    if (!(K > 0.0))
        throw std::invalid_argument("near_field_profile_error: K must be > 0");
    if (K > s.grid.length())
        throw std::domain_error("near_field_profile_error: K exceeds the domain");
    const double scale = std::pow(s.t, p.exponents.near_field());
    double worst = 0.0;
    for (std::size_t i = 0; i < s.grid.n; ++i) {
        const double x = s.grid.x(i);
        if (x > K) break;
        worst = std::max(
            worst, std::abs(scale * s.u[i] - amplitude * std::pow(x, 1.0 / p.m)));
    }
    return worst;
}

inline double near_field_profile_error(const SolverState& s,
                                       const DipoleProfile& p, double K) {
    return near_field_profile_error(s, p, K, near_field_amplitude(p));
}

/// Front deviation s(t)/t^beta - xi_M of the discrete front.
inline double front_deviation(const SolverState& s, const DipoleProfile& p) {
    const Observables obs = observables(s);
    if (!(obs.front > 0.0))
        throw std::domain_error("front_deviation: zero solution has no front");
    return obs.front / std::pow(s.t, p.exponents.beta) - p.xi_M;
}

/// Worst violation of the nodewise monotonicity of t^{1/(m-1)} u across
/// consecutive checkpoints; >= 0 means no violation anywhere.
inline double retention_check(std::span<const SolverState> states, double m) {
    if (!(m > 1.0)) throw std::invalid_argument("retention_check: m must exceed 1");
    if (states.size() < 2) return 0.0;  // vacuous
    for (std::size_t k = 1; k < states.size(); ++k) {
        if (states[k].grid != states[0].grid)
            throw std::domain_error("retention_check: states on different grids");
        if (!(states[k].t > states[k - 1].t))
            throw std::domain_error("retention_check: times must increase");
    }
    const double q = 1.0 / (m - 1.0);
    double worst = 0.0;
    for (std::size_t k = 1; k < states.size(); ++k) {
        const double s0 = std::pow(states[k - 1].t, q);
        const double s1 = std::pow(states[k].t, q);
        for (std::size_t i = 0; i < states[0].grid.n; ++i)
            worst = std::min(worst, s1 * states[k].u[i] - s0 * states[k - 1].u[i]);
    }
    return worst;
}

struct SandwichStateReport {
    double t = 0.0;
    bool skipped = false;  ///< t < region.T or no nodes in the region
    std::size_t nodes = 0;
    std::size_t violations_upper = 0;
    std::size_t violations_lower = 0;
    /// worst margins in t^alpha-scaled units; positive means satisfied
    double worst_upper = std::numeric_limits<double>::infinity();
    double worst_lower = std::numeric_limits<double>::infinity();
};

struct SandwichReport {
    double c_delta = 0.0;
    double eps = 0.0;
    double slack = 0.0;  ///< allowance in t^alpha-scaled units
    std::vector<SandwichStateReport> states;

    std::size_t nodes_checked() const {
        std::size_t k = 0;
        for (const auto& r : states) k += r.nodes;
        return k;
    }
    std::size_t violations() const {
        std::size_t k = 0;
        for (const auto& r : states) k += r.violations_upper + r.violations_lower;
        return k;
    }
    double violating_fraction() const {
        const auto n = nodes_checked();
        return n == 0 ? 0.0 : static_cast<double>(violations()) /
                                  static_cast<double>(2 * n);
    }
    double worst_upper() const {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& r : states)
            if (!r.skipped) w = std::min(w, r.worst_upper);
        return w;
    }
    double worst_lower() const {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& r : states)
            if (!r.skipped) w = std::min(w, r.worst_lower);
        return w;
    }
    bool pass() const { return violations() == 0; }
};

/// Checks (1 - C_delta eps) v <= u <= (1 + C_delta eps) V at every node of
/// the comparison region, per state. Margins are reported in t^alpha-scaled
/// units; a node counts as violating only if its scaled margin drops below
/// -slack. States earlier than the region start (or with an empty region)
/// are skipped with a notice in the report.
inline SandwichReport barrier_sandwich_check(std::span<const SolverState> states,
                                             const Barrier& barrier_super,
                                             const Barrier& barrier_sub,
                                             const Region& region, double eps,
                                             double slack = 0.0) {
    if (barrier_super.kind != BarrierKind::super ||
        barrier_sub.kind != BarrierKind::sub)
        throw std::invalid_argument("barrier_sandwich_check: barrier kinds mixed up");
    const DipoleProfile& p = barrier_super.profile;
    const double f_delta = profile_eval(p, region.delta).value;
    if (!(eps > 0.0) || !(eps < f_delta))
        throw std::invalid_argument(
            "barrier_sandwich_check: requires 0 < eps < F_M(delta)");
    SandwichReport report;
    report.c_delta = 1.0 / f_delta;
    report.eps = eps;
    report.slack = slack;
    const double up = 1.0 + report.c_delta * eps;
    const double lo = 1.0 - report.c_delta * eps;

    for (const SolverState& s : states) {
        SandwichStateReport r;
        r.t = s.t;
        if (s.t < region.T || s.t < barrier_super.T || s.t < barrier_sub.T) {
            r.skipped = true;
            report.states.push_back(r);
            continue;
        }
        const double scale = std::pow(s.t, p.exponents.alpha);
        for (std::size_t i = 0; i < s.grid.n; ++i) {
            const double x = s.grid.x(i);
            if (!region.contains(x, s.t, p.exponents.beta)) continue;
            ++r.nodes;
            const double mu =
                scale * (up * barrier_eval(barrier_super, x, s.t) - s.u[i]);
            const double ml =
                scale * (s.u[i] - lo * barrier_eval(barrier_sub, x, s.t));
            r.worst_upper = std::min(r.worst_upper, mu);
            r.worst_lower = std::min(r.worst_lower, ml);
            if (mu < -slack) ++r.violations_upper;
            if (ml < -slack) ++r.violations_lower;
        }
        if (r.nodes == 0) r.skipped = true;
        report.states.push_back(r);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Error series and rate fitting
// ---------------------------------------------------------------------------

struct ErrorCheckpoint {
    double t;
    double e_far;
    double e_near;
    double e_signed_sup;
    double e_signed_inf;
    double front_dev;
    double mass;
    double moment;
    double umax;
};

using ErrorSeries = std::vector<ErrorCheckpoint>;

inline constexpr const char* kErrorSeriesHeader =
    "t,e_far,e_near,e_signed_sup,e_signed_inf,front_dev,mass,moment,umax";

inline double error_field(const ErrorCheckpoint& c, std::string_view name) {
    if (name == "t") return c.t;
    if (name == "e_far") return c.e_far;
    if (name == "e_near") return c.e_near;
    if (name == "e_signed_sup") return c.e_signed_sup;
    if (name == "e_signed_inf") return c.e_signed_inf;
    if (name == "front_dev") return c.front_dev;
    if (name == "mass") return c.mass;
    if (name == "moment") return c.moment;
    if (name == "umax") return c.umax;
    throw std::invalid_argument("unknown error-series field '" + std::string(name) +
                                "'");
}

inline void write_error_series(std::ostream& out, const ErrorSeries& series) {
    out << kErrorSeriesHeader << "\n";
    for (const auto& c : series) {
        out << detail::g17(c.t) << "," << detail::g17(c.e_far) << ","
            << detail::g17(c.e_near) << "," << detail::g17(c.e_signed_sup) << ","
            << detail::g17(c.e_signed_inf) << "," << detail::g17(c.front_dev)
            << "," << detail::g17(c.mass) << "," << detail::g17(c.moment) << ","
            << detail::g17(c.umax) << "\n";
    }
}

inline ErrorSeries read_error_series(std::istream& in) {
    ErrorSeries series;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            if (line != kErrorSeriesHeader)
                throw config_error("error series: unexpected header '" + line + "'");
            first = false;
            continue;
        }
        ErrorCheckpoint c{};
        double* fields[] = {&c.t,         &c.e_far,  &c.e_near,
                            &c.e_signed_sup, &c.e_signed_inf, &c.front_dev,
                            &c.mass,      &c.moment, &c.umax};
        const char* ptr = line.c_str();
        for (std::size_t k = 0; k < 9; ++k) {
            char* end = nullptr;
            *fields[k] = std::strtod(ptr, &end);
            if (end == ptr) throw config_error("error series: malformed row");
            ptr = (*end == ',') ? end + 1 : end;
        }
        series.push_back(c);
    }
    if (first) throw config_error("error series: empty file");
    return series;
}

struct RateFit {
    double slope;
    double intercept;
    double residual;  ///< RMS of the log-space fit residuals
};

/// Ordinary least squares on (log t, log e). Needs >= 3 strictly positive
/// samples.
inline RateFit fit_rate(std::span<const double> t, std::span<const double> e) {
    if (t.size() != e.size())
        throw std::invalid_argument("fit_rate: size mismatch");
    if (t.size() < 3)
        throw std::domain_error("fit_rate: need at least 3 samples");
    std::vector<double> lt(t.size()), le(e.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0) || !(e[i] > 0.0))
            throw std::domain_error("fit_rate: samples must be strictly positive");
        lt[i] = std::log(t[i]);
        le[i] = std::log(e[i]);
    }
    const auto n = static_cast<double>(t.size());
    double mt = 0.0, me = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += lt[i];
        me += le[i];
    }
    mt /= n;
    me /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxx += (lt[i] - mt) * (lt[i] - mt);
        sxy += (lt[i] - mt) * (le[i] - me);
    }
    if (sxx == 0.0) throw std::domain_error("fit_rate: degenerate abscissae");
    const double slope = sxy / sxx;
    const double intercept = me - slope * mt;
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = le[i] - (intercept + slope * lt[i]);
        ss += r * r;
    }
    return {slope, intercept, std::sqrt(ss / n)};
}

inline RateFit fit_rate(const ErrorSeries& series, std::string_view field) {
    std::vector<double> t, e;
    t.reserve(series.size());
    e.reserve(series.size());
    for (const auto& c : series) {
        t.push_back(c.t);
        e.push_back(error_field(c, field));
    }
    return fit_rate(t, e);
}

}  // namespace pmelab
