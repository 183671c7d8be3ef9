#include <benchmark/benchmark.h>

#include "nmcsim/neuron.hpp"

namespace {

void BM_NeuronSecond(benchmark::State& state) {
    nmcsim::NeuronParams p;
    p.g_l_s = 5.01e-11;
    p.i_dc_a = 30.3e-12;
    nmcsim::RateOptions opt;
    opt.dt_s = 1e-5;
    opt.warmup_s = 0.0;
    for (auto _ : state) {
        const auto r = nmcsim::firing_rate(p, nmcsim::StimulusSpec{}, 1.0, opt);
        benchmark::DoNotOptimize(r.spike_count);
    }
    state.SetItemsProcessed(state.iterations() * 100000);  // steps per simulated second
}
BENCHMARK(BM_NeuronSecond);

}  // namespace
