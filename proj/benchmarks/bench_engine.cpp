#include <benchmark/benchmark.h>

#include "nmcsim/engine.hpp"
#include "nmcsim/rng.hpp"

namespace {

void BM_ScheduleAndRun(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        nmcsim::Engine eng;
        nmcsim::CounterRng rng(1);
        std::uint64_t sink = 0;
        for (int i = 0; i < n; ++i) {
            eng.schedule(static_cast<nmcsim::TimePs>(rng.next_below(100000)), 0, 1,
                         [&sink] { ++sink; });
        }
        eng.run_all();
        benchmark::DoNotOptimize(sink);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ScheduleAndRun)->Arg(1000)->Arg(100000);

}  // namespace
