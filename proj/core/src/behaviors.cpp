#include "nmcsim/behaviors.hpp"

#include <cstdio>

#include "nmcsim/device.hpp"

namespace nmcsim {

namespace {

std::string label_ms(const char* what, double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.3g ms", what, 1e3 * seconds);
    return buf;
}

}  // namespace

BehaviorSet behavior_panels(const NeuronParams& base, double kappa, double ut_v) {
    BehaviorSet set;

    {
        BehaviorPanel& p = set.leak;
        p.name = "leak";
        p.stimulus.trains.push_back({SynKernel::Fepsc, 120.0, 0.0, -1.0, false, 0});
        p.options.dt_s = 1e-5;
        p.options.warmup_s = 0.5;
        p.t_sim_s = 2.5;
        for (double i_tau : {3.7e-12, 1.85e-12, 0.925e-12}) {
            NeuronParams n = base;
            n.i_dc_a = 0.0;
            n.syn[SynKernel::Fepsc].w_a = 48e-12;
            n.g_l_s = n.c_m_f / tau_from_bias(n.c_m_f, i_tau, kappa, ut_v);
            p.settings.push_back(n);
            p.labels.push_back(label_ms("tau_m", n.tau_m_s()));
        }
    }

    {
        BehaviorPanel& p = set.threshold;
        p.name = "threshold";
        p.options.dt_s = 1e-5;
        p.options.warmup_s = 0.5;
        p.t_sim_s = 2.5;
        for (double vt : {0.35, 0.325, 0.30, 0.275, 0.25}) {
            NeuronParams n = base;
            n.v_t_v = vt;
            p.settings.push_back(n);
            char buf[32];
            std::snprintf(buf, sizeof buf, "v_t=%.3f V", vt);
            p.labels.push_back(buf);
        }
    }

    {
        BehaviorPanel& p = set.refractory;
        p.name = "refractory";
        p.options.dt_s = 2e-7;
        p.options.warmup_s = 0.1;
        p.t_sim_s = 1.1;
        for (double t_rfr : {1e-3, 2e-3, 4e-3}) {
            NeuronParams n = base;
            n.delta_t_v = 0.0;  // sharp threshold: saturation rate is 1/t_rfr
            n.i_dc_a = 5e-9;
            n.t_rfr_s = t_rfr;
            p.settings.push_back(n);
            p.labels.push_back(label_ms("t_rfr", t_rfr));
        }
    }

    {
        BehaviorPanel& p = set.adaptation;
        p.name = "adaptation";
        p.options.dt_s = 1e-5;
        p.options.warmup_s = 0.0;
        p.t_sim_s = 1.0;
        NeuronParams n = base;
        n.b_a = 2e-12;
        n.tau_w_s = 50e-3;
        set.adaptation.settings.push_back(n);
        set.adaptation.labels.push_back("b=2 pA, tau_w=50 ms");
    }

    return set;
}

std::vector<double> panel_rates(const BehaviorPanel& panel) {
    std::vector<double> rates;
    rates.reserve(panel.settings.size());
    for (const auto& s : panel.settings) {
        rates.push_back(firing_rate(s, panel.stimulus, panel.t_sim_s, panel.options).rate_hz);
    }
    return rates;
}

}  // namespace nmcsim
