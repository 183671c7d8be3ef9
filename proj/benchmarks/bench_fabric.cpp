#include <benchmark/benchmark.h>

#include "nmcsim/fabric_ops.hpp"

namespace {

void BM_BufferPipelineTokens(benchmark::State& state) {
    const int stages = static_cast<int>(state.range(0));
    const int tokens = 512;
    for (auto _ : state) {
        const auto r = nmcsim::measure_throughput(stages, 10, tokens, nmcsim::DelayModel{}, 1);
        benchmark::DoNotOptimize(r.events_per_s);
    }
    state.SetItemsProcessed(state.iterations() * tokens);
}
BENCHMARK(BM_BufferPipelineTokens)->Arg(1)->Arg(8);

void BM_ConformanceTrial(benchmark::State& state) {
    nmcsim::DelayModel d;
    d.mode = nmcsim::DelayMode::Randomized;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto rep = nmcsim::qdi_conformance(nmcsim::TopologyKind::MergeTree, 1, 32,
                                                 seed++, d);
        benchmark::DoNotOptimize(rep.passes);
    }
}
BENCHMARK(BM_ConformanceTrial);

}  // namespace
