#pragma once

namespace nmcsim {

// Subthreshold MOS model: EKV exponential channel term plus an additive,
// length-dependent leakage floor. Good for bias-point reasoning and
// qualitative sweeps; no moderate/strong inversion, no short-channel effects.

enum class MosPolarity { NMOS, PMOS };

constexpr double kSupplyRailV = 1.0;

struct MosParams {
    MosPolarity polarity = MosPolarity::NMOS;
    double i0_a = 10e-12;      // pre-exponential current at W/L = 1
    double kappa = 0.7;        // subthreshold slope factor, 0 < kappa < 1
    double ut_v = 0.02585;     // thermal voltage (300 K)
    double w_m = 200e-9;
    double l_m = 100e-9;
    double l_min_m = 30e-9;    // process minimum length
    double i_leak0_a = 10e-12; // leakage floor at minimum length
    double l_leak_m = 30e-9;   // floor decay length

    void validate() const;
};

// Leakage floor, monotonically nonincreasing in channel length:
// I_leak0 * exp(-(L - L_min) / L_leak).
double leakage_floor(const MosParams& p);

// Channel term only: I0 * (W/L) * exp(kappa*V_GS/UT) * (1 - exp(-V_DS/UT)).
// For PMOS the voltage conventions are flipped (pass the physical negative
// V_GS/V_DS; magnitudes are used internally). Returns a positive magnitude.
double channel_current(const MosParams& p, double v_gs, double v_ds);

// channel_current + leakage_floor. Voltages must be within the supply rail
// (|V| <= 1.0 V), else a SimError names the offending rail.
double drain_current(const MosParams& p, double v_gs, double v_ds);

// DPI / leak time constant from a bias current: tau = C * UT / (kappa * I).
// All arguments must be positive.
double tau_from_bias(double c_f, double i_tau_a, double kappa, double ut_v);

// Inverse mapping: the bias current that realizes a target time constant.
double bias_from_tau(double c_f, double tau_s, double kappa, double ut_v);

}  // namespace nmcsim
