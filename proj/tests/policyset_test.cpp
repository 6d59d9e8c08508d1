#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "intentsketch/infomath.hpp"
#include "intentsketch/policyset.hpp"
#include "support.hpp"

using namespace intentsketch;
using namespace intentsketch::policyset;

namespace {

EquivalenceOracle shares_char() {
    return EquivalenceOracle([](std::string_view a, std::string_view b) {
        return std::any_of(a.begin(), a.end(), [&](char c) { return b.find(c) != std::string_view::npos; });
    });
}

std::vector<double> unit(std::vector<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

Candidate random_candidate(std::mt19937_64& rng, int classes, std::size_t dim) {
    Candidate c;
    for (int k = 0; k < classes; ++k) c.profile.classes.push_back(k);
    c.profile.probs = testing_support::random_simplex(rng, static_cast<std::size_t>(classes));
    std::normal_distribution<double> g;
    std::vector<double> v(dim);
    for (double& x : v) x = g(rng);
    c.vector = unit(v);
    return c;
}

// Straight re-evaluation of the set objective for the exhaustive oracle.
double objective(const std::vector<Candidate>& cands, const std::vector<std::size_t>& idx, const ObjectiveWeights& w) {
    const std::size_t k = cands.front().profile.probs.size();
    std::vector<double> mix(k, 0.0);
    double mean_h = 0.0;
    for (auto i : idx) {
        double h = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double p = cands[i].profile.probs[c];
            mix[c] += p / static_cast<double>(idx.size());
            if (p > 0) h -= p * std::log(p);
        }
        mean_h += h / static_cast<double>(idx.size());
    }
    double h_mix = 0.0;
    for (double p : mix) {
        if (p > 0) h_mix -= p * std::log(p);
    }
    double div = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            double dot = 0.0;
            for (std::size_t d = 0; d < cands[idx[a]].vector.size(); ++d) {
                dot += cands[idx[a]].vector[d] * cands[idx[b]].vector[d];
            }
            div += 1.0 - dot;
            ++pairs;
        }
    }
    if (pairs > 0) div /= pairs;
    return h_mix - w.alpha * mean_h + w.gamma * div;
}

}  // namespace

TEST(Cluster, ExactMatchPartitions) {
    const std::vector<std::string> same = {"a", "a", "a"};
    const auto p = cluster(same, exact_match_oracle());
    EXPECT_EQ(p.class_of, (std::vector<int>{0, 0, 0}));
    EXPECT_EQ(p.class_count, 1);

    const std::vector<std::string> mixed = {"a", "b", "a"};
    const auto q = cluster(mixed, exact_match_oracle());
    EXPECT_EQ(q.class_of, (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(q.class_count, 2);
}

TEST(Cluster, TransitiveClosureThroughChain) {
    // "a" and "b" share nothing, but "ab" links them.
    const std::vector<std::string> chain = {"a", "ab", "b"};
    const auto p = cluster(chain, shares_char());
    EXPECT_EQ(p.class_of, (std::vector<int>{0, 0, 0}));
    EXPECT_EQ(p.class_count, 1);
}

TEST(Cluster, IdsFollowFirstAppearance) {
    const std::vector<std::string> v = {"z", "y", "z", "x", "y"};
    const auto p = cluster(v, exact_match_oracle());
    EXPECT_EQ(p.class_of, (std::vector<int>{0, 1, 0, 2, 1}));
}

TEST(Oracle, IdenticalStringsSkipJudge) {
    std::atomic<int> asked{0};
    EquivalenceOracle o([&](std::string_view, std::string_view) {
        ++asked;
        return false;
    });
    EXPECT_TRUE(o("same", "same"));
    EXPECT_EQ(asked.load(), 0);
    EXPECT_FALSE(o("one", "two"));
    EXPECT_EQ(asked.load(), 1);
}

TEST(Oracle, JudgeFailureSurfacesAsOracleFailure) {
    EquivalenceOracle o([](std::string_view, std::string_view) -> bool { throw std::runtime_error("boom"); });
    try {
        o("a", "b");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OracleFailure);
    }
}

TEST(Oracle, LexicalJaccard) {
    const auto o = lexical_oracle(0.6);
    EXPECT_TRUE(o("Check the audio first", "check THE audio, first!"));
    EXPECT_FALSE(o("Check the audio first", "Count the people on screen"));
}

TEST(ClassProfile, EmpiricalFrequencies) {
    const std::vector<std::string> texts = {"x", "y"};
    const auto classes = GlobalClasses::from_partition(texts, cluster(texts, exact_match_oracle()));
    ASSERT_EQ(classes.size(), 2);

    const std::vector<std::string> all0 = {"x", "x", "x", "x"};
    auto e = estimate_class_profile(0, all0, exact_match_oracle(), classes);
    EXPECT_EQ(e.distribution.probs, (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(e.sample_count, 4);

    const std::vector<std::string> even = {"x", "y", "y", "x"};
    EXPECT_EQ(estimate_class_profile(1, even, exact_match_oracle(), classes).distribution.probs,
              (std::vector<double>{0.5, 0.5}));

    const std::vector<std::string> skew = {"x", "x", "y", "x"};
    EXPECT_EQ(estimate_class_profile(2, skew, exact_match_oracle(), classes).distribution.probs,
              (std::vector<double>{0.75, 0.25}));
}

TEST(ClassProfile, UnassignedSampleIsAnError) {
    const std::vector<std::string> texts = {"x"};
    const auto classes = GlobalClasses::from_partition(texts, cluster(texts, exact_match_oracle()));
    const std::vector<std::string> samples = {"x", "w"};
    try {
        estimate_class_profile(0, samples, exact_match_oracle(), classes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnassignedSample);
    }
}

TEST(SelectDiverseSubset, ForcedAndErrors) {
    std::mt19937_64 rng(3);
    std::vector<Candidate> c;
    for (int i = 0; i < 4; ++i) c.push_back(random_candidate(rng, 3, 5));
    EXPECT_EQ(select_diverse_subset(c, 4, {}), (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_THROW(select_diverse_subset(c, 5, {}), Error);
    EXPECT_THROW(select_diverse_subset(c, 0, {}), Error);
}

TEST(SelectDiverseSubset, SingletonMaximizesOwnObjective) {
    // For one candidate the mixture is the candidate, so the score is
    // (1 - alpha) H(p_i): the most uncertain profile wins.
    const ObjectiveWeights w{0.5, 1.0};
    std::vector<Candidate> c(3);
    const std::vector<std::vector<double>> profiles = {{0.9, 0.1}, {0.5, 0.5}, {0.7, 0.3}};
    for (std::size_t i = 0; i < 3; ++i) {
        c[i].profile = {{0, 1}, profiles[i]};
        c[i].vector = unit({1.0, static_cast<double>(i)});
    }
    EXPECT_EQ(select_diverse_subset(c, 1, w), (std::vector<std::size_t>{1}));

    // equal profiles tie to index 0
    for (auto& cand : c) cand.profile = {{0, 1}, {0.5, 0.5}};
    EXPECT_EQ(select_diverse_subset(c, 1, w), (std::vector<std::size_t>{0}));
}

TEST(SelectDiverseSubset, ObjectiveMatchesIndependentEvaluation) {
    std::mt19937_64 rng(11);
    std::vector<Candidate> c;
    for (int i = 0; i < 6; ++i) c.push_back(random_candidate(rng, 4, 6));
    const ObjectiveWeights w{0.5, 1.0};
    const std::vector<std::size_t> idx = {0, 2, 5};
    EXPECT_NEAR(subset_objective(c, idx, w), objective(c, idx, w), 1e-12);
}

TEST(SelectDiverseSubset, NearExhaustiveOptimumOnFiveCandidates) {
    const ObjectiveWeights w{0.5, 1.0};
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<Candidate> c;
        for (int i = 0; i < 5; ++i) c.push_back(random_candidate(rng, 3, 4));
        const auto chosen = select_diverse_subset(c, 3, w);
        ASSERT_EQ(chosen.size(), 3u);
        EXPECT_TRUE(std::is_sorted(chosen.begin(), chosen.end()));
        double best = -1e300;
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = a + 1; b < 5; ++b)
                for (std::size_t d = b + 1; d < 5; ++d) best = std::max(best, objective(c, {a, b, d}, w));
        EXPECT_GE(objective(c, chosen, w), 0.95 * best) << "seed " << seed;
    }
}
