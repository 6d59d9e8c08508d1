#include "intentsketch/policyset.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "intentsketch/infomath.hpp"

namespace intentsketch::policyset {

EquivalenceOracle::EquivalenceOracle(EquivalenceJudge judge) : judge_(std::move(judge)) {}

bool EquivalenceOracle::operator()(std::string_view a, std::string_view b) const {
    if (a == b) return true;
    if (b < a) std::swap(a, b);
    try {
        return judge_(a, b);
    } catch (const Error& e) {
        throw Error(ErrorCode::OracleFailure, e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::OracleFailure, e.what());
    }
}

EquivalenceOracle exact_match_oracle() {
    return EquivalenceOracle([](std::string_view a, std::string_view b) { return a == b; });
}

namespace {

std::set<std::string> token_set(std::string_view text) {
    std::set<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.insert(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(std::move(cur));
    return out;
}

struct DisjointSets {
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }

    std::vector<std::size_t> parent;
};

}  // namespace

EquivalenceOracle lexical_oracle(double threshold) {
    return EquivalenceOracle([threshold](std::string_view a, std::string_view b) {
        const auto ta = token_set(a);
        const auto tb = token_set(b);
        if (ta.empty() && tb.empty()) return true;
        std::size_t shared = 0;
        for (const auto& t : ta) shared += tb.count(t);
        const std::size_t uni = ta.size() + tb.size() - shared;
        return static_cast<double>(shared) / static_cast<double>(uni) >= threshold;
    });
}

Partition cluster(std::span<const std::string> policies, const EquivalenceOracle& oracle) {
    if (policies.empty()) {
        throw Error(ErrorCode::InvalidDistribution, "cluster needs at least one policy");
    }
    DisjointSets sets(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        for (std::size_t j = i + 1; j < policies.size(); ++j) {
            if (sets.find(i) == sets.find(j)) continue;
            if (oracle(policies[i], policies[j])) sets.unite(i, j);
        }
    }

    Partition out;
    out.class_of.assign(policies.size(), -1);
    std::vector<int> id_of_root(policies.size(), -1);
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const std::size_t root = sets.find(i);
        if (id_of_root[root] < 0) id_of_root[root] = out.class_count++;
        out.class_of[i] = id_of_root[root];
    }
    return out;
}

GlobalClasses GlobalClasses::from_partition(std::span<const std::string> texts, const Partition& p) {
    GlobalClasses g;
    g.members.resize(static_cast<std::size_t>(p.class_count));
    for (std::size_t i = 0; i < texts.size(); ++i) {
        g.members[static_cast<std::size_t>(p.class_of.at(i))].push_back(texts[i]);
    }
    return g;
}

ClassProfileEstimate estimate_class_profile(int sketch_index, std::span<const std::string> samples,
                                            const EquivalenceOracle& oracle,
                                            const GlobalClasses& classes) {
    if (samples.empty()) {
        throw Error(ErrorCode::InvalidDistribution, "class profile needs at least one sample");
    }
    std::vector<int> counts(classes.members.size(), 0);
    for (const auto& sample : samples) {
        bool placed = false;
        for (std::size_t k = 0; k < classes.members.size() && !placed; ++k) {
            for (const auto& member : classes.members[k]) {
                if (oracle(sample, member)) {
                    ++counts[k];
                    placed = true;
                    break;
                }
            }
        }
        if (!placed) {
            throw Error(ErrorCode::UnassignedSample, "sample matches no global class: " + sample);
        }
    }

    ClassProfileEstimate est;
    est.sketch_index = sketch_index;
    est.sample_count = static_cast<int>(samples.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        est.distribution.classes.push_back(static_cast<int>(k));
        est.distribution.probs.push_back(static_cast<double>(counts[k]) /
                                         static_cast<double>(samples.size()));
    }
    return est;
}

double subset_objective(std::span<const Candidate> candidates, std::span<const std::size_t> chosen,
                        const ObjectiveWeights& w) {
    std::vector<ClassDistribution> profiles;
    std::vector<std::vector<double>> vectors;
    profiles.reserve(chosen.size());
    vectors.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        profiles.push_back(candidates[idx].profile);
        vectors.push_back(candidates[idx].vector);
    }
    return infomath::set_objective(profiles, w, infomath::pairwise_diversity(vectors));
}

std::vector<std::size_t> select_diverse_subset(std::span<const Candidate> candidates, std::size_t n,
                                               const ObjectiveWeights& w) {
    if (n == 0 || candidates.size() < n) {
        throw Error(ErrorCode::NotEnoughCandidates, "requested " + std::to_string(n) + " of " +
                                                        std::to_string(candidates.size()) +
                                                        " candidates");
    }
    constexpr double kImprovement = 1e-12;

    // Greedy forward selection from `seed`, then first-improvement swaps.
    auto climb = [&](std::vector<std::size_t> chosen) {
        std::vector<bool> in_set(candidates.size(), false);
        for (auto c : chosen) in_set[c] = true;
        while (chosen.size() < n) {
            std::size_t best = candidates.size();
            double best_value = 0.0;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (in_set[c]) continue;
                chosen.push_back(c);
                const double value = subset_objective(candidates, chosen, w);
                chosen.pop_back();
                if (best == candidates.size() || value > best_value + kImprovement) {
                    best = c;
                    best_value = value;
                }
            }
            chosen.push_back(best);
            in_set[best] = true;
        }

        double current = subset_objective(candidates, chosen, w);
        for (bool improved = true; improved;) {
            improved = false;
            for (std::size_t pos = 0; pos < chosen.size() && !improved; ++pos) {
                for (std::size_t c = 0; c < candidates.size() && !improved; ++c) {
                    if (in_set[c]) continue;
                    const std::size_t old = chosen[pos];
                    chosen[pos] = c;
                    const double value = subset_objective(candidates, chosen, w);
                    if (value > current + kImprovement) {
                        in_set[old] = false;
                        in_set[c] = true;
                        current = value;
                        improved = true;
                    } else {
                        chosen[pos] = old;
                    }
                }
            }
        }
        return std::pair{chosen, current};
    };

    // Plain greedy first; restarts forced through each candidate only
    // replace it on a strict gain, so ties keep the greedy answer.
    auto [chosen, value] = climb({});
    if (n > 1) {
        for (std::size_t first = 0; first < candidates.size(); ++first) {
            auto [alt, alt_value] = climb({first});
            if (alt_value > value + kImprovement) {
                chosen = std::move(alt);
                value = alt_value;
            }
        }
    }

    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace intentsketch::policyset
