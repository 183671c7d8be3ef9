#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmcsim/time.hpp"

namespace nmcsim {

// Adaptive-exponential integrate-and-fire neuron with four first-order
// synapse kernels and a voltage-gated slow excitatory branch. The membrane is
// integrated with explicit Euler (guarded dt); kernels decay exactly.

enum class SynKernel : int {
    Fepsc = 0,  // fast excitatory
    Sepsc = 1,  // slow excitatory, voltage-gated
    Fipsc = 2,  // fast inhibitory
    Sipsc = 3,  // slow inhibitory
};

constexpr int kNumKernels = 4;

constexpr double kernel_sign(SynKernel k) {
    return (k == SynKernel::Fepsc || k == SynKernel::Sepsc) ? 1.0 : -1.0;
}

const char* kernel_name(SynKernel k);
std::optional<SynKernel> kernel_from_name(const std::string& name);

struct KernelParams {
    double tau_s = 5e-3;
    double w_a = 40e-12;  // current increment per input spike, >= 0
};

struct SynapseParams {
    // Indexed by SynKernel. Fast tau must be shorter than slow tau within
    // each sign.
    std::array<KernelParams, kNumKernels> kernels{
        KernelParams{5e-3, 40e-12},   // Fepsc
        KernelParams{50e-3, 40e-12},  // Sepsc
        KernelParams{5e-3, 40e-12},   // Fipsc
        KernelParams{50e-3, 40e-12},  // Sipsc
    };

    KernelParams& operator[](SynKernel k) { return kernels[static_cast<int>(k)]; }
    const KernelParams& operator[](SynKernel k) const { return kernels[static_cast<int>(k)]; }

    void validate() const;
};

struct NeuronParams {
    double c_m_f = 0.5e-12;   // membrane capacitance
    double c_a_f = 0.2e-12;   // adaptation capacitance
    double c_r_f = 0.2e-12;   // refractory capacitance
    double g_l_s = 50e-12;    // leak conductance (tau_m = C_M / g_L = 10 ms)
    double e_l_v = 0.0;       // rest
    double v_t_v = 0.3;       // threshold
    double delta_t_v = 0.02;  // spike sharpness; 0 selects the sharp-threshold limit
    double v_reset_v = 0.0;
    double v_peak_v = 0.6;    // spike detection ceiling
    double t_rfr_s = 2e-3;    // refractory hold
    double a_s = 0.0;         // subthreshold adaptation coupling
    double b_a = 0.0;         // spike-triggered adaptation increment
    double tau_w_s = 50e-3;   // adaptation time constant
    double i_dc_a = 0.0;      // constant injection
    double v_nmda_v = 0.15;   // gate midpoint for the slow excitatory branch
    double v_gate_width_v = 0.010;
    SynapseParams syn;

    double tau_m_s() const { return c_m_f / g_l_s; }
    void validate() const;
};

struct NeuronState {
    double v_v = 0.0;
    double w_a = 0.0;                            // adaptation current (slow variable)
    std::array<double, kNumKernels> i_syn_a{};   // kernel currents, valid at t_syn_s
    std::array<double, kNumKernels> t_syn_s{};   // last update time per kernel
    double refractory_until_s = 0.0;
    std::uint64_t spike_count = 0;
};

NeuronState initial_state(const NeuronParams& p);

// Kernel current decayed to time t (does not mutate state).
double kernel_current(const NeuronState& s, const NeuronParams& p, SynKernel k, double t_s);

// Register one input spike on kernel k at time t: decay-then-jump.
void synaptic_input(NeuronState& s, const NeuronParams& p, SynKernel k, double t_s);

// Sigmoid gate on the slow excitatory branch, in [0, 1].
double nmda_gate(const NeuronParams& p, double v_v);

// I_dc + I_fepsc + gate(V)*I_sepsc - I_fipsc - I_sipsc, evaluated at time t.
double total_input_current(const NeuronState& s, const NeuronParams& p, double t_s);

// Advance the state from t to t+dt (dt <= tau_m/10, else SimError). Returns
// the spike time if the membrane crossed the detection ceiling. `i_ext_a` is
// additional injected current on top of p.i_dc_a.
std::optional<double> step(NeuronState& s, const NeuronParams& p, double t_s, double dt_s,
                           double i_ext_a = 0.0);

// ---- stimulus description & rate measurement -------------------------------

struct SpikeTrainSpec {
    SynKernel kernel = SynKernel::Fepsc;
    double rate_hz = 0.0;
    double start_s = 0.0;
    double end_s = -1.0;  // < 0: until the end of the run
    bool poisson = false;
    std::uint64_t seed = 0;
};

struct StimulusSpec {
    double dc_a = 0.0;  // added on top of NeuronParams::i_dc_a
    std::vector<SpikeTrainSpec> trains;
    std::vector<std::pair<double, SynKernel>> spikes;  // explicit (time_s, kernel)
};

struct RateOptions {
    double dt_s = 1e-5;
    double warmup_s = 0.2;       // spikes before this are not counted
    bool record_trace = false;
    double trace_stride_s = 0.0; // 0 = every step
};

struct RateResult {
    double rate_hz = 0.0;       // counted spikes / (T - warmup)
    std::uint64_t spike_count = 0;
    std::uint64_t counted_spikes = 0;
    bool zero_rate = false;
    std::vector<double> spike_times_s;               // all spikes
    std::vector<std::pair<double, double>> trace;    // (t, V) when recorded
};

// Simulate for t_total seconds and measure the firing rate after the warm-up
// window. Stimulus events are applied at their exact times by splitting steps.
RateResult firing_rate(const NeuronParams& p, const StimulusSpec& stim, double t_total_s,
                       const RateOptions& opt = {});

// Steady rate from the tail inter-spike intervals; falls back to the counted
// rate when there are too few spikes. Used where spike-count quantization is
// too coarse.
double interval_rate(const RateResult& r);

}  // namespace nmcsim
