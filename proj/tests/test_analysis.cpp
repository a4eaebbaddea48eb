#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "pmelab/analysis.hpp"
#include "pmelab/barrier.hpp"
#include "pmelab/dipole.hpp"
#include "pmelab/solver.hpp"

#include "frozen_constants.hpp"

using namespace pmelab;

namespace {

SolverState sampled_dipole(const DipoleProfile& p, double t, double dx,
                           double length) {
    SolverState s;
    s.grid = grid_covering(dx, length);
    s.t = t;
    s.u.assign(s.grid.n, 0.0);
    for (std::size_t i = 0; i < s.grid.n; ++i)
        s.u[i] = dipole_eval(p, s.grid.x(i), t);
    detail::rebuild_support(s);
    return s;
}

}  // namespace

TEST_CASE("error metrics vanish on the sampled exact solution", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const SolverState s = sampled_dipole(p, 4.0, 0.01, 1.5 * p.xi_M * std::pow(4.0, 0.25));
    CHECK(far_field_error(s, p) <= 1e-14);
    const NearFieldError nf = near_field_error(s, p);
    CHECK(nf.e_near <= 1e-14);
    CHECK(std::abs(nf.e_signed_sup) <= 1e-14);
    CHECK(std::abs(nf.e_signed_inf) <= 1e-14);
}

TEST_CASE("absolute sup is the max of the signed extrema", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    SolverState s = sampled_dipole(p, 4.0, 0.01, 1.5 * p.xi_M * std::pow(4.0, 0.25));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
    for (std::size_t i = 1; i + 2 < s.u.size(); ++i)
        s.u[i] = std::max(0.0, s.u[i] + noise(rng));
    detail::rebuild_support(s);
    const NearFieldError nf = near_field_error(s, p);
    CHECK(nf.e_near ==
          std::max(std::abs(nf.e_signed_sup), std::abs(nf.e_signed_inf)));
    CHECK(nf.e_signed_sup > 0.0);
    CHECK(nf.e_signed_inf < 0.0);
}

TEST_CASE("far-field error of the zero solution is the profile maximum",
          "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    SolverState s;
    s.grid = grid_covering(0.001, 1.2 * p.xi_M);
    s.t = 1.0;
    s.u.assign(s.grid.n, 0.0);
    detail::rebuild_support(s);
    CHECK(far_field_error(s, p) ==
          Catch::Approx(frozen::kF1Max_m2).margin(1e-6));
}

TEST_CASE("error metrics require a covering domain", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const SolverState s = sampled_dipole(p, 1.0, 0.01, 0.5 * p.xi_M);
    CHECK_THROWS_AS(far_field_error(s, p), std::domain_error);
    CHECK_THROWS_AS(near_field_error(s, p), std::domain_error);
}

TEST_CASE("near-field profile error", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);

    SECTION("analytic dipole at huge time approaches A x^{1/m} on [0, 1]") {
        const SolverState s = sampled_dipole(p, 1e8, 0.001, 2.0);
        CHECK(near_field_profile_error(s, p, 1.0) <= 1e-3);
        const SolverState s2 = sampled_dipole(p, 2e8, 0.001, 2.0);
        CHECK(near_field_profile_error(s2, p, 1.0) <
              near_field_profile_error(s, p, 1.0));
    }

    SECTION("zero solution gives the sup of the target profile") {
        SolverState s;
        s.grid = grid_covering(0.001, 2.0);
        s.t = 100.0;
        s.u.assign(s.grid.n, 0.0);
        detail::rebuild_support(s);
        const double A = near_field_amplitude(p);
        CHECK(near_field_profile_error(s, p, 1.0) ==
              Catch::Approx(A).margin(1e-9));  // A * K^{1/m}, K = 1
    }

    SECTION("preconditions") {
        const SolverState s = sampled_dipole(p, 1.0, 0.01, 4.0);
        CHECK_THROWS_AS(near_field_profile_error(s, p, 100.0), std::domain_error);
        CHECK_THROWS_AS(near_field_profile_error(s, p, 0.0), std::invalid_argument);
    }
}

TEST_CASE("front deviation", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const SolverState s = sampled_dipole(p, 1.0, 0.01, 1.5 * p.xi_M);
    CHECK(std::abs(front_deviation(s, p)) <= s.grid.dx);

    SolverState zero;
    zero.grid = grid_covering(0.01, 2.0);
    zero.t = 1.0;
    zero.u.assign(zero.grid.n, 0.0);
    detail::rebuild_support(zero);
    CHECK_THROWS_AS(front_deviation(zero, p), std::domain_error);
}

TEST_CASE("retention of the exact dipole family", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const double length = 1.5 * p.xi_M * std::pow(4.0, 0.25);
    std::vector<SolverState> states;
    for (double t : {1.0, 2.0, 4.0})
        states.push_back(sampled_dipole(p, t, 0.01, length));
    CHECK(retention_check(states, 2.0) >= -1e-12);

    SECTION("single state is vacuous") {
        std::vector<SolverState> one{states[0]};
        CHECK(retention_check(one, 2.0) == 0.0);
    }
    SECTION("mismatched grids rejected") {
        std::vector<SolverState> bad{states[0],
                                     sampled_dipole(p, 2.0, 0.02, length)};
        CHECK_THROWS_AS(retention_check(bad, 2.0), std::domain_error);
    }
    SECTION("times must increase") {
        std::vector<SolverState> bad{states[1], states[0]};
        CHECK_THROWS_AS(retention_check(bad, 2.0), std::domain_error);
    }
}

TEST_CASE("sub-barrier shift error obeys the linear bound", "[analysis]") {
    // With the factor pinned at ~1 the only discrepancy between the shifted
    // barrier and the dipole is the a-shift, bounded by m K a^{1/m} in the
    // weighted norm on the comparison region.
    const DipoleProfile p = build_profile(2.0, 1.0);
    const RegionParams rp = region_params(p);
    const double a = 0.01;
    const Barrier sub = make_barrier(BarrierKind::sub, p, a, rp.T_bar, 1.0 - 1e-12);
    const double t = rp.T_bar;
    const double bound = p.m * p.K_bound * std::pow(a, 1.0 / p.m);
    const double delta = 0.5 * rp.delta_bar;
    const double xmax = delta * std::pow(t, p.exponents.beta);
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double x = a + (xmax - a) * k / 2000.0;
        const double diff = std::abs(barrier_eval(sub, x, t) - dipole_eval(p, x, t));
        const double weighted = std::pow(t, p.exponents.near_field()) * diff /
                                std::pow(1.0 + x, 1.0 / p.m);
        worst = std::max(worst, weighted);
    }
    CHECK(worst <= bound);
    CHECK(worst > 0.0);
}

TEST_CASE("barrier sandwich on exact states", "[analysis]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const RegionParams rp = region_params(p);
    const double a = 0.01;
    const Barrier upper = make_barrier(BarrierKind::super, p, a, rp.T_bar, 2.0);
    const Barrier lower = make_barrier(BarrierKind::sub, p, a, rp.T_bar, 0.5);
    const Region region{0.5 * rp.delta_bar, rp.T_bar, a};
    const double length = 1.5 * p.xi_M * std::pow(4.0 * rp.T_bar, 0.25);

    std::vector<SolverState> states;
    for (double t : {0.5 * rp.T_bar, rp.T_bar, 2.0 * rp.T_bar, 4.0 * rp.T_bar})
        states.push_back(sampled_dipole(p, t, 0.005, length));

    const SandwichReport report =
        barrier_sandwich_check(states, upper, lower, region, 0.1);
    CHECK(report.states.size() == 4);
    CHECK(report.states[0].skipped);  // earlier than the region start
    CHECK_FALSE(report.states[1].skipped);
    CHECK(report.violations() == 0);
    CHECK(report.pass());
    CHECK(report.worst_upper() > 0.0);
    CHECK(report.worst_lower() > 0.0);
    CHECK(report.nodes_checked() > 100);

    // eps must stay below F_M(delta)
    CHECK_THROWS_AS(barrier_sandwich_check(states, upper, lower, region,
                                           profile_eval(p, region.delta).value * 1.01),
                    std::invalid_argument);
    CHECK_THROWS_AS(barrier_sandwich_check(states, lower, upper, region, 0.1),
                    std::invalid_argument);
}

TEST_CASE("rate fitting", "[analysis]") {
    SECTION("exact power laws") {
        const std::vector<double> t{1.0, 10.0, 100.0};
        std::vector<double> e;
        for (double x : t) e.push_back(std::pow(x, -0.5));
        const RateFit fit = fit_rate(t, e);
        CHECK(fit.slope == Catch::Approx(-0.5).margin(1e-12));
        CHECK(fit.residual <= 1e-12);

        std::vector<double> e58;
        for (double x : t) e58.push_back(2.0 * std::pow(x, -0.625));
        CHECK(fit_rate(t, e58).slope == Catch::Approx(-0.625).margin(1e-12));

        const std::vector<double> flat{3.0, 3.0, 3.0};
        CHECK(fit_rate(t, flat).slope == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("preconditions") {
        const std::vector<double> two{1.0, 2.0};
        CHECK_THROWS_AS(fit_rate(two, two), std::domain_error);
        const std::vector<double> t{1.0, 2.0, 3.0};
        const std::vector<double> withzero{1.0, 0.0, 1.0};
        CHECK_THROWS_AS(fit_rate(t, withzero), std::domain_error);
    }
}

TEST_CASE("error series round trip and field access", "[analysis]") {
    ErrorSeries series;
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> unit(0.001, 1.0);
    for (int k = 0; k < 5; ++k) {
        ErrorCheckpoint c{std::pow(4.0, k) * 10.0, unit(rng), unit(rng),
                          unit(rng),  -unit(rng), unit(rng) - 0.5,
                          unit(rng),  unit(rng),  unit(rng)};
        series.push_back(c);
    }
    std::stringstream file;
    write_error_series(file, series);
    const ErrorSeries back = read_error_series(file);
    REQUIRE(back.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(back[i].t == series[i].t);
        CHECK(back[i].e_far == series[i].e_far);
        CHECK(back[i].e_near == series[i].e_near);
        CHECK(back[i].e_signed_sup == series[i].e_signed_sup);
        CHECK(back[i].e_signed_inf == series[i].e_signed_inf);
        CHECK(back[i].front_dev == series[i].front_dev);
        CHECK(back[i].mass == series[i].mass);
        CHECK(back[i].moment == series[i].moment);
        CHECK(back[i].umax == series[i].umax);
    }
    CHECK(error_field(series[0], "e_near") == series[0].e_near);
    CHECK_THROWS_AS(error_field(series[0], "nonsense"), std::invalid_argument);
}
