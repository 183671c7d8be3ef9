#include <doctest.h>

#include <cmath>

#include "nmcsim/device.hpp"
#include "nmcsim/errors.hpp"

using namespace nmcsim;

namespace {

MosParams nmos() { return MosParams{}; }

}  // namespace

TEST_CASE("zero drain bias leaves only the leakage floor") {
    const MosParams p = nmos();
    CHECK(drain_current(p, 0.4, 0.0) == leakage_floor(p));
    CHECK(channel_current(p, 0.4, 0.0) == 0.0);
}

TEST_CASE("a gate step of ln(10)*UT/kappa scales the channel term by ten") {
    const MosParams p = nmos();
    const double step = std::log(10.0) * p.ut_v / p.kappa;
    const double i1 = channel_current(p, 0.2, 0.5);
    const double i2 = channel_current(p, 0.2 + step, 0.5);
    CHECK(std::fabs(i2 / i1 - 10.0) / 10.0 < 1e-9);
}

TEST_CASE("shorter channels leak more at zero gate bias") {
    MosParams shorter = nmos();
    shorter.l_m = 30e-9;
    MosParams longer = nmos();
    longer.l_m = 200e-9;
    CHECK(drain_current(shorter, 0.0, 0.5) > drain_current(longer, 0.0, 0.5));
    // Floor targets: ~10 pA at minimum length, < 0.1 pA at 200 nm.
    CHECK(leakage_floor(shorter) == doctest::Approx(10e-12));
    CHECK(leakage_floor(longer) < 0.1e-12);
}

TEST_CASE("leakage floor is nonincreasing in length") {
    MosParams p = nmos();
    double prev = 1.0;
    for (double l = 30e-9; l <= 400e-9; l += 10e-9) {
        p.l_m = l;
        const double f = leakage_floor(p);
        CHECK(f <= prev);
        prev = f;
    }
}

TEST_CASE("drain current is strictly increasing in V_GS at fixed V_DS") {
    const MosParams p = nmos();
    double prev = -1.0;
    for (double v = 0.0; v <= 1.0; v += 0.05) {
        const double i = drain_current(p, v, 0.5);
        CHECK(i > prev);
        prev = i;
    }
}

TEST_CASE("subthreshold swing matches kappa/(UT ln10) by finite differences") {
    const MosParams p = nmos();
    const double expect = p.kappa / (p.ut_v * std::log(10.0));
    const double h = 1e-5;
    for (double v = 0.1; v <= 0.6; v += 0.1) {
        const double d = (std::log10(channel_current(p, v + h, 0.5)) -
                          std::log10(channel_current(p, v - h, 0.5))) /
                         (2.0 * h);
        CHECK(std::fabs(d - expect) / expect < 1e-6);
    }
}

TEST_CASE("channel current saturates within 2% beyond four thermal voltages") {
    const MosParams p = nmos();
    const double sat = p.i0_a * (p.w_m / p.l_m) * std::exp(p.kappa * 0.3 / p.ut_v);
    for (double vds : {4.0 * p.ut_v, 5.0 * p.ut_v, 0.3, 0.5, 0.9}) {
        const double i = channel_current(p, 0.3, vds);
        CHECK(std::fabs(i - sat) / sat < 0.02);
    }
}

TEST_CASE("PMOS conventions are flipped") {
    MosParams p = nmos();
    p.polarity = MosPolarity::PMOS;
    MosParams n = nmos();
    // Same magnitudes, opposite signs: identical channel current.
    CHECK(channel_current(p, -0.4, -0.5) == channel_current(n, 0.4, 0.5));
    CHECK(channel_current(p, -0.4, -0.5) > 0.0);
}

TEST_CASE("out-of-rail voltages raise errors naming the rail") {
    const MosParams p = nmos();
    CHECK_THROWS_WITH_AS(drain_current(p, 1.2, 0.5), doctest::Contains("V_GS"), SimError);
    CHECK_THROWS_WITH_AS(drain_current(p, 0.5, -1.2), doctest::Contains("V_DS"), SimError);
}

TEST_CASE("tau_from_bias reproduces the DPI relation") {
    // 1 pF, 25.85 mV, kappa 0.7, 3.7 pA -> about 10 ms.
    const double tau = tau_from_bias(1e-12, 3.7e-12, 0.7, 25.85e-3);
    CHECK(tau == doctest::Approx(1e-12 * 25.85e-3 / (0.7 * 3.7e-12)).epsilon(1e-12));
    CHECK(tau == doctest::Approx(9.9807e-3).epsilon(1e-4));
}

TEST_CASE("tau is inversely proportional to bias and linear in capacitance") {
    const double tau = tau_from_bias(1e-12, 2e-12, 0.7, 25.85e-3);
    CHECK(tau_from_bias(1e-12, 4e-12, 0.7, 25.85e-3) == doctest::Approx(tau / 2).epsilon(1e-12));
    CHECK(tau_from_bias(0.5e-12, 2e-12, 0.7, 25.85e-3) == doctest::Approx(tau / 2).epsilon(1e-12));
}

TEST_CASE("nonpositive arguments to the bias mapping are rejected") {
    CHECK_THROWS_AS(tau_from_bias(0.0, 1e-12, 0.7, 0.025), SimError);
    CHECK_THROWS_AS(tau_from_bias(1e-12, -1e-12, 0.7, 0.025), SimError);
    CHECK_THROWS_AS(bias_from_tau(1e-12, 0.0, 0.7, 0.025), SimError);
}

TEST_CASE("bias_from_tau inverts tau_from_bias") {
    const double i = 3.1e-12;
    const double tau = tau_from_bias(0.5e-12, i, 0.7, 25.85e-3);
    CHECK(bias_from_tau(0.5e-12, tau, 0.7, 25.85e-3) == doctest::Approx(i).epsilon(1e-12));
}
