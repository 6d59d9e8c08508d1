#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intentsketch/types.hpp"

// Semantic equivalence classes over policy texts, per-sketch class profiles,
// and diversity-regularized subset selection.
namespace intentsketch::policyset {

using EquivalenceJudge = std::function<bool(std::string_view, std::string_view)>;

/// Wraps a pairwise judge. Identical strings are equivalent without asking
/// the judge; other pairs are asked in sorted order so one verdict serves
/// both directions. Judge exceptions surface as Error{OracleFailure}.
/// The judge must be safe to call concurrently.
class EquivalenceOracle {
public:
    explicit EquivalenceOracle(EquivalenceJudge judge);

    bool operator()(std::string_view a, std::string_view b) const;

private:
    EquivalenceJudge judge_;
};

/// Exact byte equality.
EquivalenceOracle exact_match_oracle();

/// Jaccard similarity of lowercase alphanumeric token sets >= threshold.
EquivalenceOracle lexical_oracle(double threshold = 0.6);

struct Partition {
    std::vector<int> class_of;  // one dense id per input, first-appearance order
    int class_count = 0;

    bool operator==(const Partition&) const = default;
};

/// Single-linkage closure: two texts share a class iff a chain of
/// oracle-true pairs connects them.
Partition cluster(std::span<const std::string> policies, const EquivalenceOracle& oracle);

/// Members of each global class, as produced by cluster().
struct GlobalClasses {
    std::vector<std::vector<std::string>> members;

    static GlobalClasses from_partition(std::span<const std::string> texts, const Partition& p);
    int size() const noexcept { return static_cast<int>(members.size()); }
};

struct ClassProfileEstimate {
    int sketch_index = 0;
    ClassDistribution distribution;
    int sample_count = 0;
};

/// Empirical class frequencies of a sketch's samples over all global
/// classes. A sample joins the first class holding an equivalent member;
/// a sample equivalent to no member raises Error{UnassignedSample}.
ClassProfileEstimate estimate_class_profile(int sketch_index, std::span<const std::string> samples,
                                            const EquivalenceOracle& oracle,
                                            const GlobalClasses& classes);

struct Candidate {
    ClassDistribution profile;
    std::vector<double> vector;  // unit-norm semantic embedding
};

/// Objective of a candidate subset: H(mixture) - alpha mean H + gamma Div.
double subset_objective(std::span<const Candidate> candidates, std::span<const std::size_t> chosen,
                        const ObjectiveWeights& w);

/// Greedy forward selection (ties to the lowest index) followed by
/// first-improvement single swaps until none strictly improves. The same
/// climb is restarted with each candidate forced in first, and a restart
/// replaces the plain greedy result only on a strict gain. Returns
/// `n` sorted candidate indices. Error{NotEnoughCandidates} if n exceeds
/// the pool or is zero.
std::vector<std::size_t> select_diverse_subset(std::span<const Candidate> candidates, std::size_t n,
                                               const ObjectiveWeights& w);

}  // namespace intentsketch::policyset
