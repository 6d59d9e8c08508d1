#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "intentsketch/policyset.hpp"

using namespace intentsketch;
using namespace intentsketch::policyset;

namespace {

std::vector<Candidate> pool(std::size_t m, std::size_t classes, std::size_t dim) {
    std::mt19937_64 rng(m * 31 + classes);
    std::exponential_distribution<double> e;
    std::normal_distribution<double> g;
    std::vector<Candidate> out(m);
    for (auto& c : out) {
        double s = 0.0;
        for (std::size_t k = 0; k < classes; ++k) {
            c.profile.classes.push_back(static_cast<int>(k));
            c.profile.probs.push_back(e(rng));
            s += c.profile.probs.back();
        }
        for (double& p : c.profile.probs) p /= s;
        double n = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            c.vector.push_back(g(rng));
            n += c.vector.back() * c.vector.back();
        }
        for (double& x : c.vector) x /= std::sqrt(n);
    }
    return out;
}

void BM_SelectDiverseSubset(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto cands = pool(m, 6, 64);
    const ObjectiveWeights w{0.5, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(select_diverse_subset(cands, 3, w));
}
BENCHMARK(BM_SelectDiverseSubset)->Arg(6)->Arg(12)->Arg(24);

void BM_LexicalCluster(benchmark::State& state) {
    std::vector<std::string> texts;
    for (int i = 0; i < state.range(0); ++i) {
        texts.push_back("listen to the speaker then compare gestures " + std::to_string(i % 4));
    }
    const auto oracle = lexical_oracle();
    for (auto _ : state) benchmark::DoNotOptimize(cluster(texts, oracle));
}
BENCHMARK(BM_LexicalCluster)->Arg(6)->Arg(24);

}  // namespace
