#include <benchmark/benchmark.h>

#include "intentsketch/simlab.hpp"

using namespace intentsketch::simlab;

namespace {

void BM_ContractionExact(benchmark::State& state) {
    const auto w = random_world(7);
    for (auto _ : state) benchmark::DoNotOptimize(contraction_exact(w));
}
BENCHMARK(BM_ContractionExact);

void BM_ContractionSampled(benchmark::State& state) {
    const auto w = random_world(7);
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(contraction_sampled(w, n, 11));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ContractionSampled)->Arg(10000)->Arg(100000);

void BM_Dpi(benchmark::State& state) {
    const auto w = random_world(3);
    for (auto _ : state) benchmark::DoNotOptimize(dpi_check(w));
}
BENCHMARK(BM_Dpi);

}  // namespace
