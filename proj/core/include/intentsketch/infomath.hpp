#pragma once

#include <span>
#include <vector>

#include "intentsketch/types.hpp"

// Scalar information-theoretic quantities. All logs are natural (nats).
namespace intentsketch::infomath {

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kRenormTolerance = 1e-6;

/// Validated probability vector. Inputs whose sum is within 1e-6 of one are
/// renormalized; anything further off, negative, or empty is rejected.
class Distribution {
public:
    explicit Distribution(std::vector<double> probs);

    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }

private:
    std::vector<double> probs_;
};

/// Returns a normalized copy or throws Error{InvalidDistribution}.
std::vector<double> checked_normalize(std::span<const double> probs);

/// -sum p ln p with 0 ln 0 = 0, clamped to [0, ln n].
double entropy(const Distribution& d);
double entropy(std::span<const double> probs);

double semantic_entropy(const ClassDistribution& cd);

/// Uniform average of distributions that share one class-id set. Members
/// may list their ids in any order; the result follows the first member.
ClassDistribution mixture(std::span<const ClassDistribution> cds);

/// H(mixture) - alpha * mean_i H(cd_i) + gamma * div
double set_objective(std::span<const ClassDistribution> cds, const ObjectiveWeights& w, double div);

/// Mean of (1 - <v_i, v_j>) over unordered pairs; 0 for a single vector.
/// Every vector must have unit L2 norm within 1e-6 (Error{NonUnitVector}).
double pairwise_diversity(std::span<const std::vector<double>> vectors);

/// 1 - max_y p(y) under 0-1 loss.
double bayes_risk_01(const AnswerPosterior& p);

/// prior - conditional. Not clamped: empirical estimates may go negative.
double information_gain(double prior_entropy, double conditional_entropy);

/// Smallest error probability Pe consistent with Fano's inequality
/// H <= h(Pe) + Pe ln(k - 1) for a k-ary variable. Diagnostic only.
double fano_error_lower_bound(double conditional_entropy, std::size_t alphabet_size);

}  // namespace intentsketch::infomath
