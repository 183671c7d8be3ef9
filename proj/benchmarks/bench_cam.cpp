#include <benchmark/benchmark.h>

#include "nmcsim/cam.hpp"
#include "nmcsim/rng.hpp"

namespace {

void BM_CamSearch(benchmark::State& state) {
    nmcsim::CamArray cam(64, 12);
    nmcsim::CounterRng rng(3);
    for (int i = 0; i < 64; ++i) {
        cam.program(i, static_cast<std::uint32_t>(rng.next_below(4096)));
    }
    std::uint32_t tag = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cam.search(tag));
        tag = (tag + 1) & 0xfff;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CamSearch);

}  // namespace
