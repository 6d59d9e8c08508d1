#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "intentsketch/infomath.hpp"

using namespace intentsketch;

namespace {

std::vector<double> simplex(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> e;
    std::vector<double> p(n);
    double s = 0.0;
    for (double& x : p) s += x = e(rng);
    for (double& x : p) x /= s;
    return p;
}

void BM_Entropy(benchmark::State& state) {
    const auto p = simplex(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(infomath::entropy(p));
}
BENCHMARK(BM_Entropy)->Arg(4)->Arg(64)->Arg(1024);

void BM_Mixture(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::vector<ClassDistribution> cds(8);
    for (std::size_t i = 0; i < cds.size(); ++i) {
        for (std::size_t c = 0; c < k; ++c) cds[i].classes.push_back(static_cast<int>(c));
        cds[i].probs = simplex(k, i + 1);
    }
    for (auto _ : state) benchmark::DoNotOptimize(infomath::mixture(cds));
}
BENCHMARK(BM_Mixture)->Arg(4)->Arg(32);

}  // namespace
