#include "nmcsim/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmcsim/errors.hpp"
#include "nmcsim/rng.hpp"

namespace nmcsim {

const char* kernel_name(SynKernel k) {
    switch (k) {
        case SynKernel::Fepsc: return "fepsc";
        case SynKernel::Sepsc: return "sepsc";
        case SynKernel::Fipsc: return "fipsc";
        case SynKernel::Sipsc: return "sipsc";
    }
    return "?";
}

std::optional<SynKernel> kernel_from_name(const std::string& name) {
    for (int i = 0; i < kNumKernels; ++i) {
        if (name == kernel_name(static_cast<SynKernel>(i))) return static_cast<SynKernel>(i);
    }
    return std::nullopt;
}

void SynapseParams::validate() const {
    for (int i = 0; i < kNumKernels; ++i) {
        if (!(kernels[i].tau_s > 0.0)) throw SimError("neuron", "synapse tau must be positive");
        if (!(kernels[i].w_a >= 0.0)) throw SimError("neuron", "synapse weight must be >= 0");
    }
    if (!((*this)[SynKernel::Fepsc].tau_s < (*this)[SynKernel::Sepsc].tau_s)) {
        throw SimError("neuron", "fast excitatory tau must be shorter than slow excitatory tau");
    }
    if (!((*this)[SynKernel::Fipsc].tau_s < (*this)[SynKernel::Sipsc].tau_s)) {
        throw SimError("neuron", "fast inhibitory tau must be shorter than slow inhibitory tau");
    }
}

void NeuronParams::validate() const {
    if (!(c_m_f > 0.0 && c_a_f > 0.0 && c_r_f > 0.0)) {
        throw SimError("neuron", "capacitances must be positive");
    }
    if (!(g_l_s > 0.0)) throw SimError("neuron", "leak conductance must be positive");
    if (!(tau_w_s > 0.0)) throw SimError("neuron", "tau_w must be positive");
    if (!(t_rfr_s >= 0.0)) throw SimError("neuron", "refractory period must be >= 0");
    if (!(delta_t_v >= 0.0)) throw SimError("neuron", "Delta_T must be >= 0");
    if (!(v_reset_v < v_t_v && v_t_v < v_peak_v)) {
        throw SimError("neuron", "require V_reset < V_T < V_peak");
    }
    if (!(v_gate_width_v > 0.0)) throw SimError("neuron", "gate width must be positive");
    syn.validate();
}

NeuronState initial_state(const NeuronParams& p) {
    NeuronState s;
    s.v_v = p.e_l_v;
    return s;
}

double kernel_current(const NeuronState& s, const NeuronParams& p, SynKernel k, double t_s) {
    const int i = static_cast<int>(k);
    const double dt = t_s - s.t_syn_s[i];
    if (dt <= 0.0) return s.i_syn_a[i];
    return s.i_syn_a[i] * std::exp(-dt / p.syn.kernels[i].tau_s);
}

void synaptic_input(NeuronState& s, const NeuronParams& p, SynKernel k, double t_s) {
    const int i = static_cast<int>(k);
    s.i_syn_a[i] = kernel_current(s, p, k, t_s) + p.syn.kernels[i].w_a;
    s.t_syn_s[i] = t_s;
}

double nmda_gate(const NeuronParams& p, double v_v) {
    return 1.0 / (1.0 + std::exp(-(v_v - p.v_nmda_v) / p.v_gate_width_v));
}

double total_input_current(const NeuronState& s, const NeuronParams& p, double t_s) {
    const double i_fe = kernel_current(s, p, SynKernel::Fepsc, t_s);
    const double i_se = kernel_current(s, p, SynKernel::Sepsc, t_s);
    const double i_fi = kernel_current(s, p, SynKernel::Fipsc, t_s);
    const double i_si = kernel_current(s, p, SynKernel::Sipsc, t_s);
    return p.i_dc_a + i_fe + nmda_gate(p, s.v_v) * i_se - i_fi - i_si;
}

std::optional<double> step(NeuronState& s, const NeuronParams& p, double t_s, double dt_s,
                           double i_ext_a) {
    if (!(dt_s > 0.0)) throw SimError("neuron", "step dt must be positive");
    const double tau_m = p.tau_m_s();
    if (dt_s > tau_m / 10.0 + 1e-18) {
        throw SimError("neuron", "dt = " + std::to_string(dt_s) +
                                     " s violates the stability guard dt <= tau_m/10 = " +
                                     std::to_string(tau_m / 10.0) + " s");
    }

    const double t_end = t_s + dt_s;

    // Refractory hold: membrane clamped at reset, adaptation keeps evolving.
    const bool held = t_s < s.refractory_until_s;
    if (held) s.v_v = p.v_reset_v;

    const double i_total = total_input_current(s, p, t_s) + i_ext_a;

    // Slow variable: tau_w * dw/dt = a (V - E_L) - w.
    const double dw = (p.a_s * (s.v_v - p.e_l_v) - s.w_a) * (dt_s / p.tau_w_s);

    if (!held) {
        // C_M dV/dt = -g_L (V - E_L) + g_L Delta_T exp((V - V_T)/Delta_T) + I - w.
        double i_exp = 0.0;
        if (p.delta_t_v > 0.0) {
            const double arg = std::min((s.v_v - p.v_t_v) / p.delta_t_v, 40.0);
            i_exp = p.g_l_s * p.delta_t_v * std::exp(arg);
        }
        const double dv = (-p.g_l_s * (s.v_v - p.e_l_v) + i_exp + i_total - s.w_a) *
                          (dt_s / p.c_m_f);
        s.v_v += dv;
    }
    s.w_a += dw;

    // Decay kernels to the step end so state times stay current.
    for (int i = 0; i < kNumKernels; ++i) {
        s.i_syn_a[i] = kernel_current(s, p, static_cast<SynKernel>(i), t_end);
        s.t_syn_s[i] = t_end;
    }

    // Sharp-threshold limit (Delta_T = 0) fires at V_T; otherwise the
    // exponential carries the membrane to the detection ceiling.
    const double detect_v = p.delta_t_v > 0.0 ? p.v_peak_v : p.v_t_v;
    if (!held && s.v_v >= detect_v) {
        s.v_v = p.v_reset_v;
        s.w_a += p.b_a;
        s.refractory_until_s = t_end + p.t_rfr_s;
        ++s.spike_count;
        return t_end;
    }
    return std::nullopt;
}

namespace {

struct StimEvent {
    TimePs t;
    SynKernel kernel;
};

std::vector<StimEvent> expand_stimulus(const StimulusSpec& stim, double t_total_s) {
    std::vector<StimEvent> ev;
    for (const auto& [t, k] : stim.spikes) {
        if (t >= 0.0 && t <= t_total_s) ev.push_back({time_from_seconds(t), k});
    }
    for (std::size_t ti = 0; ti < stim.trains.size(); ++ti) {
        const SpikeTrainSpec& tr = stim.trains[ti];
        if (tr.rate_hz <= 0.0) continue;
        const double end = tr.end_s < 0.0 ? t_total_s : std::min(tr.end_s, t_total_s);
        if (tr.poisson) {
            CounterRng rng(tr.seed, 0x9e0ull, ti);
            double t = tr.start_s;
            while (true) {
                t += -std::log(rng.next_unit_pos()) / tr.rate_hz;
                if (t > end) break;
                ev.push_back({time_from_seconds(t), tr.kernel});
            }
        } else {
            const double period = 1.0 / tr.rate_hz;
            for (double t = tr.start_s; t <= end; t += period) {
                ev.push_back({time_from_seconds(t), tr.kernel});
            }
        }
    }
    std::stable_sort(ev.begin(), ev.end(),
                     [](const StimEvent& a, const StimEvent& b) { return a.t < b.t; });
    return ev;
}

}  // namespace

RateResult firing_rate(const NeuronParams& p, const StimulusSpec& stim, double t_total_s,
                       const RateOptions& opt) {
    p.validate();
    RateResult res;
    NeuronState s = initial_state(p);

    const TimePs t_end = time_from_seconds(t_total_s);
    const TimePs dt_ps = time_from_seconds(opt.dt_s);
    if (dt_ps <= 0) throw SimError("neuron", "dt is below 1 ps");
    const std::vector<StimEvent> events = expand_stimulus(stim, t_total_s);

    const TimePs stride_ps =
        opt.trace_stride_s > 0.0 ? time_from_seconds(opt.trace_stride_s) : dt_ps;
    TimePs next_trace = 0;

    TimePs t = 0;
    std::size_t ei = 0;
    while (t < t_end) {
        if (opt.record_trace && t >= next_trace) {
            res.trace.emplace_back(time_to_seconds(t), s.v_v);
            next_trace += stride_ps;
        }
        const TimePs grid_next = (t / dt_ps + 1) * dt_ps;
        TimePs target = std::min(grid_next, t_end);
        while (ei < events.size() && events[ei].t <= t) {
            synaptic_input(s, p, events[ei].kernel, time_to_seconds(t));
            ++ei;
        }
        if (ei < events.size() && events[ei].t < target) target = events[ei].t;
        const auto spike =
            step(s, p, time_to_seconds(t), time_to_seconds(target - t), stim.dc_a);
        if (spike) res.spike_times_s.push_back(*spike);
        t = target;
    }

    res.spike_count = res.spike_times_s.size();
    for (double ts : res.spike_times_s) {
        if (ts > opt.warmup_s) ++res.counted_spikes;
    }
    const double window = t_total_s - opt.warmup_s;
    if (window <= 0.0) throw SimError("neuron", "warm-up window swallows the whole run");
    res.rate_hz = static_cast<double>(res.counted_spikes) / window;
    res.zero_rate = res.counted_spikes == 0;
    return res;
}

double interval_rate(const RateResult& r) {
    const auto& ts = r.spike_times_s;
    if (ts.size() < 3) return r.rate_hz;
    // Use the second half of the spike train; transients have decayed there.
    const std::size_t lo = ts.size() / 2;
    const double span = ts.back() - ts[lo];
    if (span <= 0.0) return r.rate_hz;
    return static_cast<double>(ts.size() - 1 - lo) / span;
}

}  // namespace nmcsim
