#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentsketch/backends.hpp"
#include "intentsketch/templates.hpp"
#include "intentsketch/types.hpp"

namespace intentsketch::pipeline {

/// Which front-end stages run:
///   CG        intent -> generate -> select -> solve
///   Abl_NI    generate -> select -> solve (no intent)
///   Abl_SP    intent -> generate(1) -> solve (selector short-circuits)
///   BaseLine  solve only
enum class AblationId { CG, Abl_NI, Abl_SP, BaseLine };

std::string_view to_string(AblationId a) noexcept;

/// Accepts CG, Abl_NI, Abl_SP, BaseLine, and labelled variants of the full
/// pipeline such as CG_Qwen. Error{ConfigError} otherwise.
AblationId ablation_from_string(std::string_view s);

inline constexpr std::array<std::string_view, 3> kEmphasisTags = {
    "evidence-first", "temporal/causal-first", "cross-modal-alignment-first"};

struct RoleBindings {
    std::string intent_perceiver;
    std::string policy_generator;
    std::string strategy_selector;  // empty: the reasoning engine evaluates
    std::string reasoning_engine;

    const std::string& selector() const noexcept {
        return strategy_selector.empty() ? reasoning_engine : strategy_selector;
    }
};

enum class JudgeMode { lexical, backend };

struct RunConfig {
    AblationId ablation = AblationId::CG;
    int num_policies = 3;
    int oversample_factor = 2;
    ObjectiveWeights weights;
    Conditioning conditioning;
    RoleBindings roles;
    std::int64_t seed = 0;

    bool objective_driven = true;  // false: first N sketches in tag rotation
    int profile_samples = 5;       // restatements per sketch for p_i(m)
    JudgeMode judge = JudgeMode::lexical;
    double lexical_threshold = 0.6;
    double generator_temperature = 0.7;
    bool free_form_sampling = true;
    int free_form_samples = 8;
    int max_parallel = 4;

    bool intent_active() const noexcept {
        return ablation == AblationId::CG || ablation == AblationId::Abl_SP;
    }
    bool front_end_active() const noexcept { return ablation != AblationId::BaseLine; }
    /// Abl_SP forces a single policy.
    int effective_num_policies() const noexcept {
        return ablation == AblationId::Abl_SP ? 1 : num_policies;
    }
};

/// Error{ConfigError} on out-of-range fields or missing role bindings for
/// the stages the ablation activates.
void validate(const RunConfig& cfg);

void to_json(nlohmann::json& j, const RunConfig& cfg);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, RunConfig& cfg);

struct RunLogRecord {
    std::string item_id;
    std::string ablation;
    std::string stage;
    std::string backend;
    std::string prompt_digest;
    std::vector<double> entropies;
    int selected_index = -1;
    std::string answer;
};

nlohmann::json to_json(const RunLogRecord& r);

/// Sink for per-stage run records; implementations accept concurrent appends.
class RunLog {
public:
    virtual ~RunLog() = default;
    virtual void append(const RunLogRecord& record) = 0;
};

class JsonlRunLog : public RunLog {
public:
    explicit JsonlRunLog(std::ostream& out) : out_(out) {}
    void append(const RunLogRecord& record) override;

private:
    std::mutex mutex_;
    std::ostream& out_;
};

class MemoryRunLog : public RunLog {
public:
    void append(const RunLogRecord& record) override;
    std::vector<RunLogRecord> records() const;

private:
    mutable std::mutex mutex_;
    std::vector<RunLogRecord> records_;
};

/// True when a sketch claims a final answer for one of `labels`, e.g.
/// "the answer is B", "ANSWER: (C)", "option A is correct".
bool reveals_answer(std::string_view sketch, std::span<const std::string> labels);

/// Final answer from the last "ANSWER: <label>" line. For multiple-choice
/// items the label must be one of the options.
std::optional<std::string> parse_answer_trailer(std::string_view completion, const OmniInput& x);

/// Index of the minimum-entropy posterior; ties (within 1e-12) go to the
/// higher maximum probability, then the lower index.
std::size_t select_min_entropy(std::span<const AnswerPosterior> posteriors);

/// Deterministic per-call seed from the run seed, item, stage and index.
std::int64_t derive_seed(std::int64_t run_seed, std::string_view item_id, std::string_view stage, int index);

struct Selection {
    PolicySketch sketch;
    std::size_t position = 0;
    std::vector<double> entropies;            // empty when short-circuited
    std::vector<AnswerPosterior> posteriors;  // parallel to entropies
};

/// Runs the staged intent-sketch pipeline over a backend registry.
class Pipeline {
public:
    explicit Pipeline(const backends::BackendRegistry& registry, PromptBundle prompts = PromptBundle::defaults(),
                      RunLog* log = nullptr);

    IntentRepresentation perceive_intent(const OmniInput& x, const RunConfig& cfg) const;

    std::vector<PolicySketch> generate_policies(const OmniInput& x, const std::optional<IntentRepresentation>& z,
                                                const RunConfig& cfg) const;

    std::pair<AnswerPosterior, double> posterior_and_entropy(const OmniInput& x, const PolicySketch& s,
                                                             const Conditioning& c, const RunConfig& cfg,
                                                             const std::optional<IntentRepresentation>& z = {}) const;

    /// A single sketch is returned without evaluator calls.
    Selection select_strategy(const OmniInput& x, std::span<const PolicySketch> sketches, const Conditioning& c,
                              const RunConfig& cfg, const std::optional<IntentRepresentation>& z = {}) const;

    /// Empty sketch text means no strategy section (BaseLine). One repair
    /// reprompt is made when the completion lacks the answer trailer.
    ReasoningOutcome solve_with_strategy(const OmniInput& x, const PolicySketch& s, const RunConfig& cfg,
                                         const std::optional<IntentRepresentation>& z = {}) const;

    /// Errors are rethrown tagged with the failing stage.
    ReasoningOutcome run(const OmniInput& x, const RunConfig& cfg) const;

    const PromptBundle& prompts() const noexcept { return prompts_; }

private:
    std::map<std::string, std::string> base_values(const OmniInput& x, const RunConfig& cfg,
                                                   const std::optional<IntentRepresentation>& z) const;
    void log(const RunLogRecord& r) const;
    void charge(const OmniInput& x, std::int64_t ms) const;
    std::int64_t take_latency(const std::string& item_id) const;

    const backends::BackendRegistry& registry_;
    PromptBundle prompts_;
    RunLog* log_;
    // Latency per in-flight item; items run concurrently but never twice at once.
    mutable std::mutex latency_mutex_;
    mutable std::map<std::string, std::int64_t> latency_;
};

}  // namespace intentsketch::pipeline
