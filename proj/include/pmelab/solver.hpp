#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pmelab/errors.hpp"
#include "pmelab/grid.hpp"
#include "pmelab/initial_data.hpp"
#include "pmelab/numerics.hpp"

namespace pmelab {

/// Nodal solution of u_t = (u^m)_xx on [0, L] with u(0) = u(L) = 0.
///
/// Invariants: all values nonnegative; the last two nodes stay zero (the far
/// boundary is a sentinel, reaching it aborts the run). support_lo/hi track
/// the first and last strictly positive node (lo > hi when u is identically
/// zero); they are bookkeeping for the stepping kernel and are rebuilt from
/// the values whenever a state is loaded from disk.
struct SolverState {
    Grid1D grid;
    double t = 0.0;
    std::vector<double> u;
    std::size_t support_lo = 1;
    std::size_t support_hi = 0;
};

/// Domain sizing for experiment setup: a fixed length, or the default
/// margin * xi_M * t_end^beta rule.
struct DomainPolicy {
    std::optional<double> fixed_length;
    double margin = 1.5;

    bool operator==(const DomainPolicy&) const = default;
};

struct SolverConfig {
    double m;
    double cfl_safety = 0.9;  ///< sigma in (0, 1)
    double t_end = 0.0;
    std::uint64_t max_steps = 200000000;
    DomainPolicy domain{};

    bool operator==(const SolverConfig&) const = default;
};

struct StepInfo {
    double dt;
};

struct RunStats {
    std::uint64_t steps = 0;
    double min_dt = std::numeric_limits<double>::infinity();  ///< inf if no steps
};

struct Observables {
    double mass;
    double moment;
    double front;
    double umax;
};

namespace detail {

inline void rebuild_support(SolverState& s) {
    const std::size_t n = s.u.size();
    s.support_lo = 1;
    s.support_hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (s.u[i] > 0.0) {
            s.support_lo = i;
            break;
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        if (s.u[i] > 0.0) {
            s.support_hi = i;
            return;
        }
    }
    s.support_lo = n;  // empty
}

/// u^m on the support neighborhood, with fast paths for the common exponents.
inline void power_range(const std::vector<double>& u, double m, std::size_t lo,
                        std::size_t hi, std::vector<double>& w) {
    if (m == 2.0) {
        for (std::size_t i = lo; i <= hi; ++i) w[i] = u[i] * u[i];
    } else if (m == 3.0) {
        for (std::size_t i = lo; i <= hi; ++i) w[i] = u[i] * u[i] * u[i];
    } else if (m == 1.5) {
        for (std::size_t i = lo; i <= hi; ++i) w[i] = u[i] * std::sqrt(u[i]);
    } else {
        for (std::size_t i = lo; i <= hi; ++i)
            w[i] = u[i] > 0.0 ? std::pow(u[i], m) : 0.0;
    }
}

}  // namespace detail

/// Samples initial data onto a grid at time t0.
///
/// The datum must vanish at x = 0 and keep clear of the two sentinel nodes
/// at the far boundary. Self-similar data carry their own start time, which
/// must agree with t0.
inline SolverState init_state(const Grid1D& grid, const InitialData& data,
                              double t0, double m) {
    validate_initial_data(data);
    if (!(m > 1.0)) throw std::invalid_argument("init_state: m must exceed 1");
    if (t0 < 0.0) throw std::invalid_argument("init_state: t0 must be >= 0");
    const double intrinsic = initial_time(data);
    if (intrinsic > 0.0 && t0 != intrinsic)
        throw config_error("init_state: t0 does not match the datum's start time");

    SolverState s;
    s.grid = grid;
    s.t = t0;
    s.u.assign(grid.n, 0.0);

    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, BoxData>) {
                for (std::size_t i = 0; i < grid.n; ++i) {
                    const double x = grid.x(i);
                    s.u[i] = (x >= d.x1 && x <= d.x2) ? d.height : 0.0;
                }
            } else if constexpr (std::is_same_v<T, HatData>) {
                const double mid = 0.5 * (d.x1 + d.x2);
                const double half = 0.5 * (d.x2 - d.x1);
                for (std::size_t i = 0; i < grid.n; ++i) {
                    const double x = grid.x(i);
                    const double r = 1.0 - std::abs(x - mid) / half;
                    s.u[i] = r > 0.0 ? d.peak * r : 0.0;
                }
            } else if constexpr (std::is_same_v<T, SampleData>) {
                std::size_t k = 0;
                for (std::size_t i = 0; i < grid.n; ++i) {
                    const double x = grid.x(i);
                    if (x < d.x.front() || x > d.x.back()) continue;
                    while (k + 2 < d.x.size() && d.x[k + 1] < x) ++k;
                    const double span = d.x[k + 1] - d.x[k];
                    const double w = span > 0.0 ? (x - d.x[k]) / span : 0.0;
                    s.u[i] = (1.0 - w) * d.u[k] + w * d.u[k + 1];
                }
            } else if constexpr (std::is_same_v<T, DipoleData>) {
                const auto p = build_profile(m, d.M);
                for (std::size_t i = 0; i < grid.n; ++i)
                    s.u[i] = dipole_eval(p, grid.x(i), t0);
            } else {
                const auto b = make_barenblatt(m, d.C, d.x0);
                for (std::size_t i = 0; i < grid.n; ++i)
                    s.u[i] = barenblatt_eval(b, grid.x(i), t0);
            }
        },
        data);

    if (s.u[0] > 0.0)
        throw config_error("init_state: initial data must vanish at x = 0");
    if (s.u[grid.n - 1] > 0.0 || s.u[grid.n - 2] > 0.0)
        throw config_error("init_state: support touches the far boundary");
    detail::rebuild_support(s);
    return s;
}

/// One explicit update u += dt/dx^2 * D2(u^m) with a caller-chosen dt.
///
/// No CFL logic: callers are responsible for dt small enough that the update
/// stays monotone (dt <= dx^2 / (2 m umax^{m-1})). Exposed so comparison
/// tests can step two states under a shared dt.
inline void apply_step(SolverState& s, double m, double dt) {
    const std::size_t n = s.u.size();
    if (s.support_lo > s.support_hi) {
        s.t += dt;
        return;
    }
    static thread_local std::vector<double> w;
    if (w.size() != n) w.assign(n, 0.0);

    const std::size_t ulo = s.support_lo > 1 ? s.support_lo - 1 : 1;
    const std::size_t uhi = s.support_hi < n - 2 ? s.support_hi + 1 : n - 2;
    const std::size_t wlo = ulo - 1;
    const std::size_t whi = uhi + 1;
    detail::power_range(s.u, m, wlo, whi, w);

    const double lambda = dt / (s.grid.dx * s.grid.dx);
    std::size_t newlo = n, newhi = 0;
    for (std::size_t i = ulo; i <= uhi; ++i) {
        const double un = s.u[i] + lambda * (w[i + 1] - 2.0 * w[i] + w[i - 1]);
        assert(un >= 0.0);
        s.u[i] = un;
        if (un > 0.0) {
            if (newlo == n) newlo = i;
            newhi = i;
        }
    }
    s.support_lo = newlo;
    s.support_hi = newhi;
    s.t += dt;
    if (newhi >= n - 2)
        throw resize_error("support reached the far boundary at t = " +
                           std::to_string(s.t) + "; rerun on a larger domain");
}

/// One adaptive step, capped so t_cap is hit exactly.
///
/// dt = sigma dx^2 / (2 m umax^{m-1}), additionally capped by 0.1 t (for
/// t > 0) and by the distance to t_cap. A zero state fast-forwards to the
/// cap without stepping.
inline StepInfo step(SolverState& s, const SolverConfig& cfg, double t_cap) {
    if (!(t_cap > s.t)) throw std::domain_error("step: t_cap must exceed state time");
    const double remaining = t_cap - s.t;

    double umax = 0.0;
    for (std::size_t i = s.support_lo; i <= s.support_hi && i < s.u.size(); ++i)
        umax = std::max(umax, s.u[i]);

    if (umax == 0.0) {
        s.t = t_cap;  // zero is a fixed point of the flow
        return {remaining};
    }

    double dt = cfg.cfl_safety * s.grid.dx * s.grid.dx /
                (2.0 * cfg.m * std::pow(umax, cfg.m - 1.0));
    if (s.t > 0.0) dt = std::min(dt, 0.1 * s.t);
    if (dt >= remaining) {
        apply_step(s, cfg.m, remaining);
        s.t = t_cap;  // land exactly
        return {remaining};
    }
    if (!(dt > 0.0) || s.t + dt == s.t)
        throw numeric_error("step: dt underflow (umax = " + std::to_string(umax) +
                            ")");
    apply_step(s, cfg.m, dt);
    return {dt};
}

/// Repeated stepping until t_target, landing on it exactly.
inline RunStats run_to(SolverState& s, const SolverConfig& cfg, double t_target) {
    if (t_target < s.t)
        throw std::domain_error("run_to: t_target must be >= state time");
    RunStats stats;
    while (s.t < t_target) {
        if (stats.steps >= cfg.max_steps)
            throw max_steps_error("run_to: exceeded " +
                                  std::to_string(cfg.max_steps) +
                                  " steps at t = " + std::to_string(s.t));
        const StepInfo info = step(s, cfg, t_target);
        ++stats.steps;
        stats.min_dt = std::min(stats.min_dt, info.dt);
    }
    return stats;
}

/// Discrete mass, first moment, front position, and max value.
/// Sums are compensated so the 1e-10 drift bounds are measurable.
inline Observables observables(const SolverState& s) {
    KahanSum mass, moment;
    double umax = 0.0;
    for (std::size_t i = s.support_lo; i <= s.support_hi && i < s.u.size(); ++i) {
        mass.add(s.u[i]);
        moment.add(s.grid.x(i) * s.u[i]);
        umax = std::max(umax, s.u[i]);
    }
    const double front =
        s.support_lo <= s.support_hi ? s.grid.x(s.support_hi) : 0.0;
    return {mass.value() * s.grid.dx, moment.value() * s.grid.dx, front, umax};
}

/// Piecewise-linear interpolation of the nodal values.
inline double interpolate(const SolverState& s, double x) {
    if (x < 0.0 || x > s.grid.length())
        throw std::domain_error("interpolate: x outside [0, L]");
    const double r = x / s.grid.dx;
    auto i = static_cast<std::size_t>(r);
    if (i >= s.grid.n - 1) return s.u[s.grid.n - 1];
    const double w = r - static_cast<double>(i);
    return (1.0 - w) * s.u[i] + w * s.u[i + 1];
}

}  // namespace pmelab
