#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace intentsketch::simlab {

struct Cardinalities {
    int x = 4;
    int i = 3;
    int s = 3;
    int s_star = 3;
    int c = 2;
    int y = 4;
};

/// Row-stochastic table: one row per parent configuration.
using Table = std::vector<std::vector<double>>;

/// A finite generative model over
///   X -> I -> S -> S*,  X -> C,  (X, I, S, C) -> Y.
/// Rows of p(Y|X,I,S,C) are indexed ((x*|I| + i)*|S| + s)*|C| + c.
struct SyntheticWorld {
    std::uint64_t seed = 0;
    Cardinalities card;
    std::vector<double> p_x;
    Table p_i_given_x;
    Table p_s_given_i;
    Table p_sstar_given_s;
    Table p_c_given_x;
    Table p_y_given_xisc;
};

/// Uniform tables of the given shape; a starting point for hand-built worlds.
SyntheticWorld uniform_world(Cardinalities card);

/// Every row drawn from Dirichlet(1) with a seeded generator.
SyntheticWorld random_world(std::uint64_t seed, Cardinalities card = {});

/// Error{InvalidWorld} on non-positive cardinalities, mis-shaped tables or
/// rows that are not distributions.
void validate(const SyntheticWorld& w);

std::size_t state_space(const SyntheticWorld& w);
inline constexpr std::size_t kExactStateLimit = 1'000'000;

/// Slack for floating-point summation when checking exact inequalities.
inline constexpr double kExactSlack = 1e-12;

struct ContractionResult {
    // H(Y|X), H(Y|X,I), H(Y|X,I,S), H(Y|X,I,S,C)
    std::array<double, 4> entropies{};
    // Sampled mode only: standard errors of the three successive drops.
    std::array<double, 3> sigmas{};
    std::size_t samples = 0;  // 0 in exact mode
    bool pass = false;
};

ContractionResult contraction_exact(const SyntheticWorld& w);
/// Plug-in estimates from `n_samples` ancestral draws; each step passes when
/// it rises by at most 3 standard errors of the paired difference.
ContractionResult contraction_sampled(const SyntheticWorld& w, std::size_t n_samples, std::uint64_t sample_seed);

struct DpiResult {
    double i_x_i = 0.0;
    double i_x_s = 0.0;
    double i_x_sstar = 0.0;
    bool pass = false;
};
DpiResult dpi_check(const SyntheticWorld& w);

struct MinMeanResult {
    double min_entropy = 0.0;
    double mean_entropy = 0.0;
    bool pass = false;
};
/// Each inner vector is one candidate's answer posterior.
MinMeanResult min_vs_mean_check(std::span<const std::vector<double>> posteriors);

struct StrictReductionResult {
    double h_y_x = 0.0;
    double h_y_x_sstar = 0.0;
    double cmi_y_sstar_x = 0.0;
    bool strict_drop = false;
    bool pass = false;
};
StrictReductionResult strict_reduction_demo(const SyntheticWorld& w);

/// X read as the pair (Q, Z) with Z = x mod z_card: I(S;(Q,Z)) - I(S;Q) >= 0.
struct IntentGainResult {
    double i_s_qz = 0.0;
    double i_s_q = 0.0;
    double gain = 0.0;
    bool pass = false;
};
IntentGainResult intent_gain_check(const SyntheticWorld& w, int z_card = 2);

/// Error lower bound from H(Y|X) against the achieved Bayes risk.
struct FanoResult {
    double h_y_x = 0.0;
    double error_lower_bound = 0.0;
    double bayes_risk = 0.0;
    bool consistent = false;
};
FanoResult fano_diagnostic(const SyntheticWorld& w);

/// Standard error of the plug-in H(Y|X) estimate at n and 2n samples.
struct ConvergenceResult {
    double se_n = 0.0;
    double se_2n = 0.0;
    double ratio = 0.0;
    bool pass = false;  // ratio in [1, 4]
};
ConvergenceResult convergence_check(const SyntheticWorld& w, std::size_t n_samples, std::uint64_t sample_seed);

// ---------------------------------------------------------------------------
// Check runner

struct CheckOptions {
    bool exact = true;
    std::size_t samples = 20'000;
    Cardinalities card;
};

struct CheckReport {
    std::string check;
    std::uint64_t seed = 0;
    nlohmann::json quantities;
    bool pass = false;
};

nlohmann::json to_json(const CheckReport& r);

/// contraction, dpi, min_vs_mean, strict_reduction, intent_gain, fano, convergence.
std::span<const std::string_view> known_checks();

/// Error{ConfigError} for an unknown check name.
CheckReport run_check(std::string_view check, std::uint64_t seed, const CheckOptions& options = {});

}  // namespace intentsketch::simlab
