#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>
#include <optional>
#include <random>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pmelab/analysis.hpp"
#include "pmelab/barenblatt.hpp"
#include "pmelab/barrier.hpp"
#include "pmelab/experiment.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

/// One verification check: what was measured, against which threshold.
struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    std::string detail;
};

struct AcceptanceReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
};

struct VerifyOptions {
    /// Overrides the built-in long-run (box data) experiment for the
    /// trend/front/sandwich/retention/profile checks.
    std::optional<ExperimentConfig> trend_config;
    int threads = 0;  ///< 0 = PME_THREADS or a small default
};

inline int resolve_verify_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PME_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(4u, hw == 0 ? 1u : hw));
}

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// RK4 integration of the barrier factor ODE in log-time, compared against
/// the closed form along the way. Independent oracle for barrier_factor:
/// it steps d(phi)/d(log t) = -alpha (phi^m - phi) and never touches the
/// Bernoulli solution.
inline double factor_ode_max_deviation(const Barrier& b, double t_end, int steps) {
    const double alpha = b.profile.exponents.alpha;
    const double m = b.profile.m;
    const auto rhs = [&](double phi) { return -alpha * (std::pow(phi, m) - phi); };
    const double tau0 = std::log(b.T);
    const double tau1 = std::log(t_end);
    const double h = (tau1 - tau0) / steps;
    double phi = b.factor0;
    double worst = 0.0;
    for (int k = 1; k <= steps; ++k) {
        const double k1 = rhs(phi);
        const double k2 = rhs(phi + 0.5 * h * k1);
        const double k3 = rhs(phi + 0.5 * h * k2);
        const double k4 = rhs(phi + h * k3);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t = std::exp(tau0 + k * h);
        worst = std::max(worst, std::abs(phi - barrier_factor(b, t)));
    }
    return worst;
}

/// Finite-difference residual V_t - (V^m)_xx of a barrier, step h in both
/// variables.
inline double barrier_fd_residual(const Barrier& b, double x, double t, double h) {
    const double m = b.profile.m;
    const double vt =
        (barrier_eval(b, x, t + h) - barrier_eval(b, x, t - h)) / (2.0 * h);
    const auto vm = [&](double xx) {
        return std::pow(barrier_eval(b, xx, t), m);
    };
    const double vxx = (vm(x + h) - 2.0 * vm(x) + vm(x - h)) / (h * h);
    return vt - vxx;
}

struct ExactnessRun {
    double e_far_final = 0.0;
    double moment_drift_rel = 0.0;
    bool mass_monotone = true;
    double seconds = 0.0;
};

/// Dipole self-test: initialize with D_1(., 1) and march to t = 16.
inline ExactnessRun dipole_exactness_run(double dx) {
    const auto t0 = std::chrono::steady_clock::now();
    const double m = 2.0;
    SolverConfig cfg{m, 0.9, 16.0};
    const DipoleProfile sizing = build_profile(m, 1.0);
    const double length =
        1.5 * sizing.xi_M * std::pow(16.0, sizing.exponents.beta);
    SolverState state = init_state(grid_covering(dx, length),
                                   DipoleData{1.0, 1.0}, 1.0, m);
    const Observables first = observables(state);
    const DipoleProfile p = build_profile(m, first.moment);

    ExactnessRun run;
    double prev_mass = first.mass;
    for (double tc : {2.0, 4.0, 8.0, 16.0}) {
        run_to(state, cfg, tc);
        const Observables obs = observables(state);
        if (obs.mass > prev_mass) run.mass_monotone = false;
        prev_mass = obs.mass;
        run.moment_drift_rel =
            std::max(run.moment_drift_rel,
                     std::abs(obs.moment - first.moment) / first.moment);
    }
    run.e_far_final = far_field_error(state, p);
    run.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return run;
}

struct BarenblattRun {
    double mass_drift_rel = 0.0;
    double seconds = 0.0;
};

/// Interior Barenblatt translate, run while its support stays off x = 0
/// (touch time is t = 8 for this configuration; we stop at t = 7).
inline BarenblattRun barenblatt_conservation_run() {
    const auto t0 = std::chrono::steady_clock::now();
    const double m = 2.0;
    SolverConfig cfg{m, 0.9, 7.0};
    const double kappa = (m - 1.0) / (2.0 * m * (m + 1.0));
    SolverState state = init_state(grid_covering(0.01, 6.0),
                                   BarenblattData{kappa, 2.0, 1.0}, 1.0, m);
    const double mass0 = observables(state).mass;
    BarenblattRun run;
    for (double tc : {2.0, 4.0, 7.0}) {
        run_to(state, cfg, tc);
        run.mass_drift_rel =
            std::max(run.mass_drift_rel,
                     std::abs(observables(state).mass - mass0) / mass0);
    }
    run.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return run;
}

}  // namespace detail

/// Built-in long-run configuration: box datum on [1, 2], m = 2, dx = 1/100,
/// geometric checkpoints 10, 40, 160, 640.
inline ExperimentConfig default_trend_config() {
    ExperimentConfig cfg;
    cfg.m = 2.0;
    cfg.initial = BoxData{1.0, 1.0, 2.0};
    cfg.grid.dx = 0.01;
    cfg.t0 = 0.0;
    cfg.t_end = 640.0;
    return cfg;
}

/// Runs the full verification suite. Checks 1-4 are closed-form/oracle
/// checks; 5-6 are solver self-tests against exact solutions; 7-11 evaluate
/// one long run. Independent simulations may run concurrently, capped by
/// PME_THREADS (or opts.threads).
inline AcceptanceReport run_acceptance(const VerifyOptions& opts = {}) {
    using clock = std::chrono::steady_clock;
    using detail::fmt;
    AcceptanceReport report;
    const int threads = resolve_verify_threads(opts.threads);

    // Kick off the four independent simulations first.
    std::counting_semaphore<64> gate(std::min(threads, 64));
    auto gated = [&gate](auto fn) {
        return [&gate, fn]() {
            gate.acquire();
            struct Release {
                std::counting_semaphore<64>* g;
                ~Release() { g->release(); }
            } release{&gate};
            return fn();
        };
    };
    auto fut_exact_coarse = std::async(
        std::launch::async, gated([] { return detail::dipole_exactness_run(1.0 / 200.0); }));
    auto fut_exact_fine = std::async(
        std::launch::async, gated([] { return detail::dipole_exactness_run(1.0 / 400.0); }));
    auto fut_barenblatt = std::async(
        std::launch::async, gated([] { return detail::barenblatt_conservation_run(); }));
    const ExperimentConfig trend_cfg =
        opts.trend_config ? *opts.trend_config : default_trend_config();
    auto fut_trend = std::async(std::launch::async,
                                gated([&trend_cfg] { return run_experiment(trend_cfg); }));

    // --- 1: constants and the moment identity (m = 2) -----------------------
    {
        const auto t0 = clock::now();
        CheckResult c{1, "constants_m2"};
        const DipoleProfile p = build_profile(2.0, 1.0);
        const double kappa_err = std::abs(p.kappa - 1.0 / 12.0);
        const double moment_err = std::abs(profile_moment(p) - 1.0);
        const double identity =
            p.C * p.C * p.xi1 / p.kappa * (2.0 / 5.0 - 1.0 / 4.0);
        const double identity_err = std::abs(identity - 1.0);
        c.measured = moment_err;
        c.tolerance = 1e-8;
        c.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        c.pass = kappa_err == 0.0 && moment_err <= 1e-8 && identity_err <= 1e-9 &&
                 c.seconds < 1.0;
        c.detail = "kappa_err=" + fmt(kappa_err) + " C=" + fmt(p.C) +
                   " identity_err=" + fmt(identity_err);
        report.checks.push_back(c);
    }

    // --- 2: profile equation residual ---------------------------------------
    {
        const auto t0 = clock::now();
        CheckResult c{2, "profile_ode_residual"};
        double worst = 0.0;
        double worst_order = std::numeric_limits<double>::infinity();
        for (double m : {1.5, 2.0, 3.0}) {
            const DipoleProfile p = build_profile(m, 1.0);
            const auto max_residual = [&](double h) {
                double r = 0.0;
                for (int k = 0; k <= 32; ++k) {
                    const double xi = p.xi_M * (0.1 + 0.8 * k / 32.0);
                    r = std::max(r, std::abs(profile_ode_residual(p, xi, h)));
                }
                return r;
            };
            worst = std::max(worst, max_residual(1e-4));
            // order measured where truncation still dominates rounding
            const double r1 = max_residual(8e-3);
            const double r2 = max_residual(4e-3);
            const double r3 = max_residual(2e-3);
            worst_order = std::min({worst_order, std::log2(r1 / r2), std::log2(r2 / r3)});
        }
        c.measured = worst;
        c.tolerance = 1e-4;
        c.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        c.pass = worst <= 1e-4 && worst_order >= 1.9 && c.seconds < 1.0;
        c.detail = "min_order=" + fmt(worst_order);
        report.checks.push_back(c);
    }

    // --- 3: barrier factor ODE vs closed form --------------------------------
    {
        const auto t0 = clock::now();
        CheckResult c{3, "barrier_factor_ode"};
        double worst = 0.0;
        for (double m : {1.5, 2.0, 3.0}) {
            const DipoleProfile p = build_profile(m, 1.0);
            for (double k0 : {1.5, 2.0, 4.0})
                worst = std::max(worst,
                                 detail::factor_ode_max_deviation(
                                     make_barrier(BarrierKind::super, p, 0.5, 1.0, k0),
                                     1e4, 16384));
            for (double c0 : {0.2, 0.5, 0.8})
                worst = std::max(worst,
                                 detail::factor_ode_max_deviation(
                                     make_barrier(BarrierKind::sub, p, 0.5, 1.0, c0),
                                     1e4, 16384));
        }
        const DipoleProfile p2 = build_profile(2.0, 1.0);
        const double spot = barrier_factor(
            make_barrier(BarrierKind::super, p2, 0.5, 1.0, 2.0), 4.0);
        const double spot_err = std::abs(spot - 4.0 / 3.0);
        c.measured = worst;
        c.tolerance = 1e-10;
        c.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        c.pass = worst <= 1e-10 && spot_err <= 1e-12 && c.seconds < 1.0;
        c.detail = "k(4) spot_err=" + fmt(spot_err);
        report.checks.push_back(c);
    }

    // --- 4: barrier residual signs and FD agreement --------------------------
    {
        const auto t0 = clock::now();
        CheckResult c{4, "barrier_residual_signs"};
        const DipoleProfile p = build_profile(2.0, 1.0);
        const RegionParams rp = region_params(p);
        const double a = 0.1;
        const Barrier upper = make_barrier(BarrierKind::super, p, a, rp.T_bar, 2.0);
        const Barrier lower = make_barrier(BarrierKind::sub, p, a, rp.T_bar, 0.5);
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double super_min = std::numeric_limits<double>::infinity();
        double sub_max = -std::numeric_limits<double>::infinity();
        const double delta = 0.9 * rp.delta_bar;
        for (int k = 0; k < 1000; ++k) {
            const double t = rp.T_bar * std::pow(100.0, unit(rng));
            const double xmax = delta * std::pow(t, p.exponents.beta);
            const double xs = unit(rng) * xmax;
            super_min = std::min(super_min, barrier_residual(upper, xs, t));
            const double xb = a + unit(rng) * (xmax - a);
            sub_max = std::max(sub_max, barrier_residual(lower, xb, t));
        }
        // FD cross-check of the closed-form residual
        const Barrier spot = make_barrier(BarrierKind::super, p, 0.1, 1.0, 2.0);
        const double closed = barrier_residual(spot, 0.4, 2.0);
        const double dev_1em4 =
            std::abs(closed - detail::barrier_fd_residual(spot, 0.4, 2.0, 1e-4));
        const double d1 =
            std::abs(closed - detail::barrier_fd_residual(spot, 0.4, 2.0, 1e-2));
        const double d2 =
            std::abs(closed - detail::barrier_fd_residual(spot, 0.4, 2.0, 5e-3));
        const double d3 =
            std::abs(closed - detail::barrier_fd_residual(spot, 0.4, 2.0, 2.5e-3));
        const double order = std::min(std::log2(d1 / d2), std::log2(d2 / d3));
        const double sign_margin = std::min(super_min, -sub_max);
        c.measured = sign_margin;
        c.tolerance = 0.0;
        c.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        c.pass = super_min > 0.0 && sub_max < 0.0 && dev_1em4 <= 1e-5 &&
                 order >= 1.9 && c.seconds < 5.0;
        c.detail = "super_min=" + fmt(super_min) + " sub_max=" + fmt(sub_max) +
                   " fd_dev@1e-4=" + fmt(dev_1em4) + " fd_order=" + fmt(order);
        report.checks.push_back(c);
    }

    // --- 5: solver exactness against the dipole ------------------------------
    const detail::ExactnessRun coarse = fut_exact_coarse.get();
    const detail::ExactnessRun fine = fut_exact_fine.get();
    {
        CheckResult c{5, "solver_dipole_exactness"};
        const double ratio = coarse.e_far_final / fine.e_far_final;
        c.measured = coarse.e_far_final;
        c.tolerance = 2e-2;
        c.seconds = coarse.seconds + fine.seconds;
        c.pass = coarse.e_far_final <= 2e-2 && ratio >= 1.5 &&
                 coarse.moment_drift_rel <= 1e-10 && coarse.mass_monotone &&
                 fine.mass_monotone && c.seconds <= 60.0;
        c.detail = "refine_ratio=" + fmt(ratio) +
                   " moment_drift=" + fmt(coarse.moment_drift_rel) +
                   " mass_monotone=" + (coarse.mass_monotone ? "yes" : "no");
        report.checks.push_back(c);
    }

    // --- 6: Barenblatt mass conservation -------------------------------------
    {
        CheckResult c{6, "barenblatt_mass_conservation"};
        const auto t0 = clock::now();
        const auto b = make_barenblatt(2.0, 1.0 / 12.0, 2.0);
        const double m1 = barenblatt_mass(b, 1.0);
        const double m4 = barenblatt_mass(b, 4.0);
        const double quad_diff = std::abs(m1 - m4) / m1;
        const double quad_seconds =
            std::chrono::duration<double>(clock::now() - t0).count();
        const detail::BarenblattRun run = fut_barenblatt.get();
        c.measured = run.mass_drift_rel;
        c.tolerance = 1e-10;
        c.seconds = run.seconds + quad_seconds;
        c.pass = quad_diff <= 1e-8 && run.mass_drift_rel <= 1e-10 &&
                 c.seconds <= 30.0;
        c.detail = "quadrature_rel_diff=" + fmt(quad_diff) + " mass=" + fmt(m1);
        report.checks.push_back(c);
    }

    // --- 7-11: the long run ---------------------------------------------------
    const ExperimentResult trend = fut_trend.get();
    const std::size_t last = trend.series.size() - 1;

    {
        CheckResult c{7, "theorem_trend"};
        bool far_dec = true, near_dec = true;
        for (std::size_t i = 1; i < trend.series.size(); ++i) {
            far_dec = far_dec && trend.series[i].e_far < trend.series[i - 1].e_far;
            near_dec = near_dec && trend.series[i].e_near < trend.series[i - 1].e_near;
        }
        const double ratio = trend.series[last].e_near / trend.series[0].e_near;
        const double sup0 = trend.series[0].e_signed_sup;
        const double inf0 = trend.series[0].e_signed_inf;
        const double sup1 = trend.series[last].e_signed_sup;
        const double inf1 = trend.series[last].e_signed_inf;
        const bool straddle = sup1 >= 0.0 && inf1 <= 0.0;
        const bool shrink =
            std::abs(sup1) <= std::abs(sup0) && std::abs(inf1) <= std::abs(inf0);
        c.measured = ratio;
        c.tolerance = 0.5;
        c.seconds = trend.summary.wall_seconds;
        c.pass = far_dec && near_dec && ratio <= 0.5 && (straddle || shrink) &&
                 c.seconds <= 300.0;
        c.detail = std::string("e_far_decreasing=") + (far_dec ? "yes" : "no") +
                   " e_near_decreasing=" + (near_dec ? "yes" : "no") +
                   " signed_last=[" + fmt(inf1) + "," + fmt(sup1) + "]";
        report.checks.push_back(c);
    }

    {
        CheckResult c{8, "front_asymptotics"};
        const double xi_M = trend.profile.xi_M;
        const double rel = std::abs(trend.series[last].front_dev) / xi_M;
        bool above = true;
        for (std::size_t i = trend.series.size() - 2; i < trend.series.size(); ++i) {
            const double slack_xi =
                trend.config.grid.dx /
                std::pow(trend.series[i].t, trend.profile.exponents.beta);
            above = above && trend.series[i].front_dev >= -slack_xi;
        }
        c.measured = rel;
        c.tolerance = 0.05;
        c.seconds = 0.0;
        c.pass = rel <= 0.05 && above;
        c.detail = std::string("front_dev=") + fmt(trend.series[last].front_dev) +
                   " s>=xi_M t^beta - dx at last two: " + (above ? "yes" : "no");
        report.checks.push_back(c);
    }

    {
        CheckResult c{9, "barrier_sandwich"};
        const double slack = 2.0 * coarse.e_far_final;
        const RegionParams rp = region_params(trend.profile);
        const Region region{trend.config.sandwich.delta_fraction * rp.delta_bar,
                            rp.T_bar, trend.config.sandwich.a};
        const Barrier upper =
            make_barrier(BarrierKind::super, trend.profile, trend.config.sandwich.a,
                         rp.T_bar, trend.config.sandwich.k0);
        const Barrier lower =
            make_barrier(BarrierKind::sub, trend.profile, trend.config.sandwich.a,
                         rp.T_bar, trend.config.sandwich.c0);
        std::vector<SolverState> late;
        for (const auto& s : trend.snapshots)
            if (s.t >= 4.0 * rp.T_bar) late.push_back(s);
        const auto t0 = clock::now();
        if (late.empty()) {
            c.pass = false;
            c.detail = "no checkpoints at t >= 4 T_bar";
        } else {
            const SandwichReport rep = barrier_sandwich_check(
                late, upper, lower, region, trend.config.sandwich.eps, slack);
            const double worst = std::min(rep.worst_upper(), rep.worst_lower());
            c.measured = worst;
            c.tolerance = slack;
            c.pass = rep.violations() == 0;
            c.detail = "checked=" + std::to_string(late.size()) +
                       " states, nodes=" + std::to_string(rep.nodes_checked()) +
                       ", worst_scaled_margin=" + fmt(worst) +
                       " (pass if >= -slack), slack=" + fmt(slack);
        }
        c.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        report.checks.push_back(c);
    }

    {
        CheckResult c{10, "retention"};
        const double worst = retention_check(trend.snapshots, trend.config.m);
        c.measured = worst;
        c.tolerance = 1e-6;
        c.seconds = 0.0;
        c.pass = worst >= -1e-6;
        c.detail = "worst violation of t^{1/(m-1)} u monotonicity (pass if >= -1e-6)";
        report.checks.push_back(c);
    }

    {
        CheckResult c{11, "near_field_profile"};
        bool decreasing = true;
        for (std::size_t i = 1; i < trend.profile_err.size(); ++i)
            decreasing = decreasing && trend.profile_err[i] < trend.profile_err[i - 1];
        const double primary = trend.profile_err.back();
        const double alt = trend.profile_err_alt.back();
        c.measured = primary;
        c.tolerance = alt;
        c.seconds = 0.0;
        c.pass = decreasing && primary < alt;
        c.detail = std::string("decreasing=") + (decreasing ? "yes" : "no") +
                   " terminal: exponent (m+1)/(2m^2) -> " + fmt(primary) +
                   ", exponent 2/(m+1) -> " + fmt(alt);
        report.checks.push_back(c);
    }

    return report;
}

inline nlohmann::json acceptance_to_json(const AcceptanceReport& report) {
    nlohmann::json j;
    j["pass"] = report.all_pass();
    auto& checks = j["checks"] = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json e;
        e["id"] = c.id;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["measured"] = c.measured;
        e["tolerance"] = c.tolerance;
        e["seconds"] = c.seconds;
        e["detail"] = c.detail;
        checks.push_back(e);
    }
    return j;
}

}  // namespace pmelab
