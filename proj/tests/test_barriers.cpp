#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pmelab/barrier.hpp"
#include "pmelab/dipole.hpp"

#include "frozen_constants.hpp"

using namespace pmelab;

namespace {

// Fixed-step RK4 on t k' = -alpha (k^m - k) in plain time, the oracle of the
// closed-form factor. Deliberately distinct from the log-time integrator used
// by the verification suite.
double rk4_factor(double m, double T, double factor0, double t_end, double h) {
    const double alpha = 1.0 / m;
    const auto rhs = [&](double t, double k) {
        return -alpha * (std::pow(k, m) - k) / t;
    };
    double t = T, k = factor0;
    while (t < t_end - 0.5 * h) {
        const double k1 = rhs(t, k);
        const double k2 = rhs(t + 0.5 * h, k + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, k + 0.5 * h * k2);
        const double k4 = rhs(t + h, k + h * k3);
        k += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return k;
}

}  // namespace

TEST_CASE("barrier factor closed form", "[barriers]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const Barrier sup = make_barrier(BarrierKind::super, p, 0.5, 1.0, 2.0);
    const Barrier sub = make_barrier(BarrierKind::sub, p, 0.5, 1.0, 0.5);

    CHECK(barrier_factor(sup, 4.0) == Catch::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(barrier_factor(sub, 4.0) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(barrier_factor(sup, 1.0) == 2.0);
    CHECK(barrier_factor(sub, 1.0) == 0.5);
    // limits at large time
    CHECK(std::abs(barrier_factor(sup, 1e12) - 1.0) < 1e-5);
    CHECK(std::abs(barrier_factor(sub, 1e12) - 1.0) < 1e-5);
    CHECK(std::abs(barrier_factor(sup, 1e12) - 1.0) <
          std::abs(barrier_factor(sup, 1e6) - 1.0));

    CHECK_THROWS_AS(barrier_factor(sup, 0.5), std::domain_error);
}

TEST_CASE("barrier factor agrees with step-by-step integration", "[barriers]") {
    for (double m : {1.5, 2.0, 3.0}) {
        const DipoleProfile p = build_profile(m, 1.0);
        const Barrier sup = make_barrier(BarrierKind::super, p, 0.5, 1.0, 2.0);
        const Barrier sub = make_barrier(BarrierKind::sub, p, 0.5, 1.0, 0.5);
        CAPTURE(m);
        CHECK(barrier_factor(sup, 4.0) ==
              Catch::Approx(rk4_factor(m, 1.0, 2.0, 4.0, 1e-4)).margin(1e-10));
        CHECK(barrier_factor(sub, 4.0) ==
              Catch::Approx(rk4_factor(m, 1.0, 0.5, 4.0, 1e-4)).margin(1e-10));
    }
}

TEST_CASE("factor monotonicity invariants", "[barriers]") {
    for (double m : {1.5, 2.0, 3.0}) {
        const DipoleProfile p = build_profile(m, 1.0);
        const Barrier sup = make_barrier(BarrierKind::super, p, 0.5, 2.0, 3.0);
        const Barrier sub = make_barrier(BarrierKind::sub, p, 0.5, 2.0, 0.3);
        double prev_k = barrier_factor(sup, 2.0);
        double prev_c = barrier_factor(sub, 2.0);
        for (double t = 3.0; t < 2e4; t *= 2.0) {
            const double k = barrier_factor(sup, t);
            const double c = barrier_factor(sub, t);
            CHECK(k < prev_k);
            CHECK(k > 1.0);
            CHECK(c > prev_c);
            CHECK(c < 1.0);
            prev_k = k;
            prev_c = c;
        }
    }
}

TEST_CASE("barrier evaluation", "[barriers]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const Barrier sup = make_barrier(BarrierKind::super, p, 0.5, 1.0, 2.0);
    const Barrier sub = make_barrier(BarrierKind::sub, p, 0.5, 1.0, 0.5);

    // sub vanishes at and left of its shift
    CHECK(barrier_eval(sub, 0.5, 2.0) == 0.0);
    CHECK(barrier_eval(sub, 0.2, 2.0) == 0.0);
    CHECK(barrier_eval(sub, 0.0, 2.0) == 0.0);
    CHECK(barrier_eval(sub, 0.7, 2.0) > 0.0);

    // super at the origin: k0 F_1(a / T^beta) T^{-alpha} with T = 1
    CHECK(barrier_eval(sup, 0.0, 1.0) ==
          Catch::Approx(2.0 * frozen::kF1Half_m2).epsilon(1e-10));

    CHECK_THROWS_AS(barrier_eval(sup, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(make_barrier(BarrierKind::super, p, 0.5, 1.0, 0.9),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_barrier(BarrierKind::sub, p, 0.5, 1.0, 1.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_barrier(BarrierKind::super, p, 1.5, 1.0, 2.0),
                    std::invalid_argument);
}

TEST_CASE("sub <= dipole <= super on the monotone region", "[barriers]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const double a = 0.05;
    const RegionParams rp = region_params(p);
    const Barrier sup = make_barrier(BarrierKind::super, p, a, rp.T_bar, 2.0);
    const Barrier sub = make_barrier(BarrierKind::sub, p, a, rp.T_bar, 0.5);
    for (double t : {rp.T_bar, 2.0 * rp.T_bar, 10.0 * rp.T_bar}) {
        const double xmax = rp.delta_bar * std::pow(t, p.exponents.beta);
        for (int k = 1; k <= 30; ++k) {
            const double x = a + (xmax - a) * k / 31.0;
            const double d = dipole_eval(p, x, t);
            CAPTURE(t, x);
            CHECK(barrier_eval(sub, x, t) <= d);
            CHECK(d <= barrier_eval(sup, x, t));
        }
    }
}

TEST_CASE("barrier residual signs and finite-difference agreement", "[barriers]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const RegionParams rp = region_params(p);
    const double a = 0.1;
    const Barrier sup = make_barrier(BarrierKind::super, p, a, rp.T_bar, 2.0);
    const Barrier sub = make_barrier(BarrierKind::sub, p, a, rp.T_bar, 0.5);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double t = rp.T_bar * std::pow(30.0, unit(rng));
        const double xmax = 0.9 * rp.delta_bar * std::pow(t, p.exponents.beta);
        const double xs = unit(rng) * xmax;
        const double xb = a + unit(rng) * (xmax - a);
        CHECK(barrier_residual(sup, xs, t) > 0.0);
        CHECK(barrier_residual(sub, xb, t) < 0.0);
    }

    // closed form vs central differences of barrier_eval
    const Barrier spot = make_barrier(BarrierKind::super, p, 0.1, 1.0, 2.0);
    const double closed = barrier_residual(spot, 0.4, 2.0);
    const auto fd = [&](double h) {
        const double vt =
            (barrier_eval(spot, 0.4, 2.0 + h) - barrier_eval(spot, 0.4, 2.0 - h)) /
            (2.0 * h);
        const auto vm = [&](double x) {
            return std::pow(barrier_eval(spot, x, 2.0), 2.0);
        };
        const double vxx = (vm(0.4 + h) - 2.0 * vm(0.4) + vm(0.4 - h)) / (h * h);
        return vt - vxx;
    };
    CHECK(closed == Catch::Approx(fd(1e-4)).margin(1e-5));
    const double d1 = std::abs(closed - fd(1e-2));
    const double d2 = std::abs(closed - fd(5e-3));
    CHECK(std::log2(d1 / d2) > 1.9);

    // shifted similarity variable must stay inside the support
    CHECK_THROWS_AS(barrier_residual(sup, 100.0, rp.T_bar), std::domain_error);
    // sub residual just right of the shift: clamped, not thrown
    CHECK(barrier_residual(sub, a + 1e-16, rp.T_bar) < 0.0);
}

TEST_CASE("region parameters", "[barriers]") {
    const DipoleProfile p = build_profile(2.0, 1.0);
    const RegionParams rp = region_params(p);
    CHECK(rp.delta_bar == Catch::Approx(frozen::kDeltaBar_m2M1).epsilon(1e-9));
    CHECK(rp.T_bar == Catch::Approx(frozen::kTBar_m2M1).epsilon(1e-9));
    CHECK(rp.T_bar == Catch::Approx(std::pow(rp.delta_bar, -4.0)).epsilon(1e-13));

    // scaling: M -> 16 M doubles delta_bar for m = 2
    const DipoleProfile p16 = build_profile(2.0, 16.0);
    const RegionParams rp16 = region_params(p16);
    CHECK(rp16.delta_bar == Catch::Approx(2.0 * rp.delta_bar).epsilon(1e-12));

    // C_delta = 1 / F_M(delta)
    const double delta = 0.5 * rp.delta_bar;
    CHECK(comparison_constant(p, delta) ==
          Catch::Approx(1.0 / profile_eval(p, delta).value).epsilon(1e-14));
    CHECK_THROWS_AS(comparison_constant(p, p.xi_M * 1.5), std::invalid_argument);

    const Region region{delta, rp.T_bar, 0.01};
    CHECK(region.contains(0.1, rp.T_bar, p.exponents.beta));
    CHECK_FALSE(region.contains(0.005, rp.T_bar, p.exponents.beta));
    CHECK_FALSE(region.contains(0.1, rp.T_bar * 0.5, p.exponents.beta));
    CHECK_FALSE(
        region.contains(delta * std::pow(rp.T_bar, 0.25) + 0.01, rp.T_bar, 0.25));
}
