#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmcsim/behaviors.hpp"
#include "nmcsim/errors.hpp"
#include "nmcsim/neuron.hpp"
#include "nmcsim/rng.hpp"

using namespace nmcsim;

namespace {

// Matches the calibrated config defaults; tests here stay config-free.
NeuronParams defaults() {
    NeuronParams p;
    p.g_l_s = 5.01e-11;
    p.i_dc_a = 30.2974e-12;
    return p;
}

// Independent oracle for the sharp-threshold constant-current neuron:
// ISI = t_rfr + tau_m * ln(I / (I - g_L (V_T - E_L))), reset at E_L.
double lif_rate(const NeuronParams& p) {
    const double drive = p.g_l_s * (p.v_t_v - p.e_l_v);
    return 1.0 / (p.t_rfr_s + p.tau_m_s() * std::log(p.i_dc_a / (p.i_dc_a - drive)));
}

}  // namespace

TEST_CASE("kernel input decays exponentially: value at tau is w/e") {
    const NeuronParams p = defaults();
    NeuronState s = initial_state(p);
    synaptic_input(s, p, SynKernel::Fepsc, 0.0);
    const double tau = p.syn[SynKernel::Fepsc].tau_s;
    const double expect = p.syn[SynKernel::Fepsc].w_a / std::exp(1.0);
    const double got = kernel_current(s, p, SynKernel::Fepsc, tau);
    CHECK(std::fabs(got - expect) / expect < 1e-6);
}

TEST_CASE("zero-weight kernels change nothing beyond decay") {
    NeuronParams p = defaults();
    p.syn[SynKernel::Fipsc].w_a = 0.0;
    NeuronState s = initial_state(p);
    synaptic_input(s, p, SynKernel::Fipsc, 0.0);
    CHECK(kernel_current(s, p, SynKernel::Fipsc, 0.0) == 0.0);
    synaptic_input(s, p, SynKernel::Fipsc, 1.0);
    CHECK(kernel_current(s, p, SynKernel::Fipsc, 1.0) == 0.0);
}

TEST_CASE("periodic drive settles at mean w*r*tau") {
    // Steady-state mean of the decay-and-jump process equals w*r*tau.
    const NeuronParams p = defaults();
    NeuronState s = initial_state(p);
    const double r = 1000.0, tau = p.syn[SynKernel::Fepsc].tau_s;
    const double w = p.syn[SynKernel::Fepsc].w_a;
    double sum = 0.0;
    int samples = 0;
    for (int i = 0; i < 2000; ++i) {
        const double t = i / r;
        synaptic_input(s, p, SynKernel::Fepsc, t);
        if (i >= 1000) {
            // average the sawtooth over one period with a fine comb
            for (int k = 0; k < 100; ++k) {
                sum += kernel_current(s, p, SynKernel::Fepsc, t + k / (100.0 * r));
                ++samples;
            }
        }
    }
    const double mean = sum / samples;
    CHECK(std::fabs(mean - w * r * tau) / (w * r * tau) < 0.05);
}

TEST_CASE("total input current composes the four kernels and the gate") {
    NeuronParams p = defaults();
    NeuronState s = initial_state(p);

    SUBCASE("all kernels zero: exactly the DC term") {
        CHECK(total_input_current(s, p, 0.0) == p.i_dc_a);
    }
    SUBCASE("far below the gate the slow excitatory branch is shut") {
        synaptic_input(s, p, SynKernel::Sepsc, 0.0);
        s.v_v = p.v_nmda_v - 10.0 * p.v_gate_width_v;
        const double i_sepsc = kernel_current(s, p, SynKernel::Sepsc, 0.0);
        const double contribution = total_input_current(s, p, 0.0) - p.i_dc_a;
        CHECK(contribution < 1e-4 * i_sepsc);
    }
    SUBCASE("at the gate midpoint the branch contributes exactly half") {
        synaptic_input(s, p, SynKernel::Sepsc, 0.0);
        s.v_v = p.v_nmda_v;
        const double i_sepsc = kernel_current(s, p, SynKernel::Sepsc, 0.0);
        CHECK(total_input_current(s, p, 0.0) ==
              doctest::Approx(p.i_dc_a + 0.5 * i_sepsc).epsilon(1e-12));
    }
    SUBCASE("inhibitory kernels subtract") {
        synaptic_input(s, p, SynKernel::Fipsc, 0.0);
        CHECK(total_input_current(s, p, 0.0) ==
              doctest::Approx(p.i_dc_a - p.syn[SynKernel::Fipsc].w_a).epsilon(1e-12));
    }
}

TEST_CASE("gate stays within [0, 1] everywhere") {
    const NeuronParams p = defaults();
    for (double v = -2.0; v <= 2.0; v += 0.01) {
        const double g = nmda_gate(p, v);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
    }
    CHECK(nmda_gate(p, p.v_nmda_v) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("rest is a fixed point of the sharp-threshold dynamics") {
    NeuronParams p = defaults();
    p.delta_t_v = 0.0;
    p.i_dc_a = 0.0;
    NeuronState s = initial_state(p);
    for (int i = 0; i < 1000; ++i) {
        CHECK_FALSE(step(s, p, i * 1e-4, 1e-4).has_value());
    }
    CHECK(s.v_v == p.e_l_v);
    CHECK(s.w_a == 0.0);
}

TEST_CASE("with the soft threshold the rest drift is negligible") {
    NeuronParams p = defaults();
    p.i_dc_a = 0.0;
    NeuronState s = initial_state(p);
    for (int i = 0; i < 1000; ++i) step(s, p, i * 1e-4, 1e-4);
    // The soft threshold shifts rest by about Delta_T*exp(-V_T/Delta_T) ~ 6 nV.
    CHECK(std::fabs(s.v_v - p.e_l_v) < 1e-8);
}

TEST_CASE("stability guard rejects coarse steps") {
    const NeuronParams p = defaults();
    NeuronState s = initial_state(p);
    CHECK_THROWS_WITH_AS(step(s, p, 0.0, p.tau_m_s() / 5.0), doctest::Contains("tau_m/10"),
                         SimError);
    CHECK_THROWS_AS(step(s, p, 0.0, 0.0), SimError);
}

TEST_CASE("sharp-threshold firing matches the closed-form rate within 1%") {
    NeuronParams p = defaults();
    p.delta_t_v = 0.0;
    p.a_s = 0.0;
    p.b_a = 0.0;
    p.i_dc_a = 25e-12;
    p.t_rfr_s = 2e-3;
    const double expect = lif_rate(p);
    RateOptions opt;
    opt.dt_s = p.tau_m_s() / 1000.0;
    opt.warmup_s = 0.3;
    const auto r = firing_rate(p, StimulusSpec{}, 2.3, opt);
    CHECK(std::fabs(interval_rate(r) - expect) / expect < 0.01);
}

TEST_CASE("zero drive reports a zero rate with the flag, not an error") {
    NeuronParams p = defaults();
    p.i_dc_a = 0.0;
    const auto r = firing_rate(p, StimulusSpec{}, 0.5, RateOptions{1e-5, 0.1});
    CHECK(r.zero_rate);
    CHECK(r.rate_hz == 0.0);
}

TEST_CASE("no two spikes are closer than the refractory period, any stimulus") {
    NeuronParams p = defaults();
    p.t_rfr_s = 3e-3;
    StimulusSpec stim;
    stim.trains.push_back({SynKernel::Fepsc, 800.0, 0.0, -1.0, true, 99});
    stim.trains.push_back({SynKernel::Sepsc, 300.0, 0.0, -1.0, true, 7});
    stim.dc_a = 20e-12;
    const auto r = firing_rate(p, stim, 2.0, RateOptions{1e-5, 0.0});
    REQUIRE(r.spike_count >= 10);
    for (std::size_t i = 1; i < r.spike_times_s.size(); ++i) {
        CHECK(r.spike_times_s[i] - r.spike_times_s[i - 1] >= p.t_rfr_s);
    }
}

TEST_CASE("adaptation lengthens inter-spike intervals toward convergence") {
    NeuronParams p = defaults();
    p.b_a = 2e-12;
    p.tau_w_s = 50e-3;
    const RateOptions opt{1e-5, 0.0};
    const auto r = firing_rate(p, StimulusSpec{}, 1.0, opt);
    REQUIRE(r.spike_count >= 20);
    std::vector<double> isi;
    for (std::size_t i = 1; i < r.spike_times_s.size(); ++i) {
        isi.push_back(r.spike_times_s[i] - r.spike_times_s[i - 1]);
    }
    // Nondecreasing up to one integration step of quantization.
    for (std::size_t i = 1; i < isi.size(); ++i) {
        CHECK(isi[i] >= isi[i - 1] - opt.dt_s - 1e-12);
    }
    CHECK(isi.back() > isi.front() * 1.15);
    // Converged: the last two intervals agree to better than 1%.
    CHECK(std::fabs(isi[isi.size() - 1] - isi[isi.size() - 2]) / isi.back() < 0.01);
}

TEST_CASE("behavior panels reproduce the four qualitative responses") {
    const BehaviorSet set = behavior_panels(defaults(), 0.7, 25.85e-3);

    SUBCASE("rates follow the leak ordering") {
        const auto rates = panel_rates(set.leak);
        REQUIRE(rates.size() == 3);
        CHECK(rates[0] < rates[1]);
        CHECK(rates[1] < rates[2]);
        CHECK(rates[0] > 0.0);
    }
    SUBCASE("rates rise strictly as the threshold drops") {
        const auto rates = panel_rates(set.threshold);
        REQUIRE(rates.size() == 5);
        for (std::size_t i = 1; i < rates.size(); ++i) CHECK(rates[i] > rates[i - 1]);
    }
    SUBCASE("saturated rates pin to 1/t_rfr within 5%") {
        const auto rates = panel_rates(set.refractory);
        REQUIRE(rates.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            const double t_rfr = set.refractory.settings[i].t_rfr_s;
            CHECK(std::fabs(rates[i] * t_rfr - 1.0) < 0.05);
        }
        CHECK(rates[0] > rates[1]);
        CHECK(rates[1] > rates[2]);
    }
}

TEST_CASE("halving the step changes spike counts by at most one per second") {
    const BehaviorSet set = behavior_panels(defaults(), 0.7, 25.85e-3);
    const BehaviorPanel* panels[] = {&set.leak, &set.threshold, &set.refractory,
                                     &set.adaptation};
    for (const BehaviorPanel* panel : panels) {
        for (const auto& s : panel->settings) {
            RateOptions coarse = panel->options;
            coarse.warmup_s = 0.0;
            RateOptions fine = coarse;
            fine.dt_s = coarse.dt_s / 10.0;
            const auto a = firing_rate(s, panel->stimulus, 1.0, coarse);
            const auto b = firing_rate(s, panel->stimulus, 1.0, fine);
            INFO(panel->name);
            CHECK(std::llabs(static_cast<long long>(a.spike_count) -
                             static_cast<long long>(b.spike_count)) <= 1);
        }
    }
}

TEST_CASE("rate is monotone in threshold, refractory period and drive (5x5x5)") {
    const NeuronParams base = defaults();
    const double vts[] = {0.26, 0.28, 0.30, 0.32, 0.34};
    const double trs[] = {1e-3, 2e-3, 3e-3, 4e-3, 5e-3};
    const double ids[] = {20e-12, 25e-12, 30e-12, 35e-12, 40e-12};
    static double rate[5][5][5];
    const RateOptions opt{1e-5, 0.5};
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            for (int c = 0; c < 5; ++c) {
                NeuronParams p = base;
                p.v_t_v = vts[a];
                p.t_rfr_s = trs[b];
                p.i_dc_a = ids[c];
                rate[a][b][c] = firing_rate(p, StimulusSpec{}, 2.5, opt).rate_hz;
            }
        }
    }
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            for (int c = 0; c < 5; ++c) {
                if (a + 1 < 5) CHECK(rate[a + 1][b][c] <= rate[a][b][c]);  // higher V_T
                if (b + 1 < 5) CHECK(rate[a][b + 1][c] <= rate[a][b][c]);  // longer t_rfr
                if (c + 1 < 5) CHECK(rate[a][b][c + 1] >= rate[a][b][c]);  // stronger drive
            }
        }
    }
}

TEST_CASE("parameter validation") {
    NeuronParams p = defaults();
    p.v_reset_v = p.v_t_v;  // violates V_reset < V_T
    CHECK_THROWS_AS(p.validate(), SimError);
    p = defaults();
    p.syn[SynKernel::Fepsc].tau_s = 0.1;  // fast slower than slow
    CHECK_THROWS_AS(p.validate(), SimError);
    p = defaults();
    p.syn[SynKernel::Sipsc].w_a = -1e-12;
    CHECK_THROWS_AS(p.validate(), SimError);
}

TEST_CASE("kernel currents never go negative under random stimulus") {
    NeuronParams p = defaults();
    StimulusSpec stim;
    stim.trains.push_back({SynKernel::Fepsc, 500.0, 0.0, -1.0, true, 3});
    stim.trains.push_back({SynKernel::Fipsc, 400.0, 0.0, -1.0, true, 4});
    stim.trains.push_back({SynKernel::Sipsc, 200.0, 0.0, -1.0, true, 5});
    NeuronState s = initial_state(p);
    CounterRng rng(6);
    double t = 0.0;
    for (int i = 0; i < 20000; ++i) {
        t += 1e-5;
        if (rng.next_below(10) == 0) {
            synaptic_input(s, p, static_cast<SynKernel>(rng.next_below(4)), t);
        }
        step(s, p, t, 1e-5);
        for (int k = 0; k < kNumKernels; ++k) {
            CHECK(s.i_syn_a[static_cast<std::size_t>(k)] >= 0.0);
        }
    }
}
