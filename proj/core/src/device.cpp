#include "nmcsim/device.hpp"

#include <cmath>
#include <string>

#include "nmcsim/errors.hpp"

namespace nmcsim {

void MosParams::validate() const {
    if (!(kappa > 0.0 && kappa < 1.0)) throw SimError("device", "kappa must be in (0, 1)");
    if (!(ut_v > 0.0)) throw SimError("device", "UT must be positive");
    if (!(w_m > 0.0 && l_m > 0.0)) throw SimError("device", "W and L must be positive");
    if (!(i0_a > 0.0)) throw SimError("device", "I0 must be positive");
    if (!(i_leak0_a >= 0.0 && l_leak_m > 0.0)) throw SimError("device", "bad leakage floor parameters");
}

double leakage_floor(const MosParams& p) {
    return p.i_leak0_a * std::exp(-(p.l_m - p.l_min_m) / p.l_leak_m);
}

double channel_current(const MosParams& p, double v_gs, double v_ds) {
    if (p.polarity == MosPolarity::PMOS) {
        v_gs = -v_gs;
        v_ds = -v_ds;
    }
    const double shape = p.w_m / p.l_m;
    return p.i0_a * shape * std::exp(p.kappa * v_gs / p.ut_v) *
           (1.0 - std::exp(-v_ds / p.ut_v));
}

double drain_current(const MosParams& p, double v_gs, double v_ds) {
    p.validate();
    if (std::fabs(v_gs) > kSupplyRailV) {
        throw SimError("device", "V_GS = " + std::to_string(v_gs) +
                                     " V exceeds the supply rail (|V| <= 1.0 V)");
    }
    if (std::fabs(v_ds) > kSupplyRailV) {
        throw SimError("device", "V_DS = " + std::to_string(v_ds) +
                                     " V exceeds the supply rail (|V| <= 1.0 V)");
    }
    return channel_current(p, v_gs, v_ds) + leakage_floor(p);
}

double tau_from_bias(double c_f, double i_tau_a, double kappa, double ut_v) {
    if (!(c_f > 0.0 && i_tau_a > 0.0 && kappa > 0.0 && ut_v > 0.0)) {
        throw SimError("device", "tau_from_bias requires positive arguments");
    }
    return c_f * ut_v / (kappa * i_tau_a);
}

double bias_from_tau(double c_f, double tau_s, double kappa, double ut_v) {
    if (!(c_f > 0.0 && tau_s > 0.0 && kappa > 0.0 && ut_v > 0.0)) {
        throw SimError("device", "bias_from_tau requires positive arguments");
    }
    return c_f * ut_v / (kappa * tau_s);
}

}  // namespace nmcsim
