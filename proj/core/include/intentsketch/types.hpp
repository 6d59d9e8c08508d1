#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentsketch/error.hpp"

namespace intentsketch {

/// One labelled answer slot of a multiple-choice item.
struct AnswerOption {
    std::string label;
    std::string text;

    bool operator==(const AnswerOption&) const = default;
};

/// A question over optional video and audio. Media are opaque references
/// (paths or URLs) that are forwarded to backends untouched.
struct OmniInput {
    std::string id;
    std::optional<std::string> video;
    std::optional<std::string> audio;
    std::string query;
    std::vector<AnswerOption> options;  // empty means free-form
    std::optional<std::string> gold;
    nlohmann::json meta = nlohmann::json::object();

    bool is_multiple_choice() const noexcept { return !options.empty(); }
    std::vector<std::string> slot_labels() const;

    bool operator==(const OmniInput&) const = default;
};

/// Throws Error{EmptyQuery | TooFewOptions | DuplicateSlotLabel | GoldNotInOptions}.
const OmniInput& validate_input(const OmniInput& item);

struct IntentRepresentation {
    std::string text;
    std::string source_backend;
    std::int64_t token_count = 0;

    bool operator==(const IntentRepresentation&) const = default;
};

/// Whitespace token count; there is no tokenizer in this project.
std::int64_t count_tokens(const std::string& text);

/// Probabilities over semantic equivalence classes.
struct ClassDistribution {
    std::vector<int> classes;
    std::vector<double> probs;

    bool operator==(const ClassDistribution&) const = default;
};

/// Throws Error{InvalidDistribution} when lengths differ, a probability lies
/// outside [0,1] or the sum is off by more than 1e-9.
void validate(const ClassDistribution& cd);

struct PolicySketch {
    int index = 0;
    std::string text;
    std::optional<std::string> emphasis_tag;
    std::optional<ClassDistribution> class_profile;

    bool operator==(const PolicySketch&) const = default;
};

enum class PosteriorSource { logprob, sampled };

/// Answer posterior over slots with its entropy in nats. Build through
/// make_posterior so that the normalization and entropy invariants hold.
struct AnswerPosterior {
    std::vector<std::string> slots;
    std::vector<double> probs;
    double entropy_nats = 0.0;
    PosteriorSource source = PosteriorSource::logprob;

    bool operator==(const AnswerPosterior&) const = default;
};

/// Validates (renormalizing when within 1e-6 of 1) and computes the entropy.
AnswerPosterior make_posterior(std::vector<std::string> slots, std::vector<double> probs,
                               PosteriorSource source);

/// Throws InvalidDistribution if `p` violates normalization or entropy consistency.
void validate(const AnswerPosterior& p);

/// Extra task conditioning handed to the selector and reasoner. Free text.
struct Conditioning {
    std::string text;

    bool operator==(const Conditioning&) const = default;
};

struct ReasoningOutcome {
    std::string answer;
    std::string trace;
    int selected_sketch_index = -1;  // -1 when no sketch was used
    std::vector<double> per_candidate_entropies;
    std::optional<std::string> intent;
    std::vector<std::string> sketches;
    std::int64_t latency_ms = 0;  // summed transport latency of the calls made

    bool operator==(const ReasoningOutcome&) const = default;
};

struct ObjectiveWeights {
    double alpha = 0.5;
    double gamma = 1.0;

    bool operator==(const ObjectiveWeights&) const = default;
};

/// Throws Error{InvalidWeights} unless both weights are strictly positive.
void validate(const ObjectiveWeights& w);

std::string_view to_string(PosteriorSource s) noexcept;
PosteriorSource posterior_source_from_string(std::string_view s);

// JSON wire forms. OmniInput follows the dataset line shape
// {"id","query","options":[{"label","text"}],"gold","video","audio","meta"};
// unknown top-level keys are folded into meta on parse.
void to_json(nlohmann::json& j, const AnswerOption& v);
void from_json(const nlohmann::json& j, AnswerOption& v);
void to_json(nlohmann::json& j, const OmniInput& v);
void from_json(const nlohmann::json& j, OmniInput& v);
void to_json(nlohmann::json& j, const IntentRepresentation& v);
void from_json(const nlohmann::json& j, IntentRepresentation& v);
void to_json(nlohmann::json& j, const ClassDistribution& v);
void from_json(const nlohmann::json& j, ClassDistribution& v);
void to_json(nlohmann::json& j, const PolicySketch& v);
void from_json(const nlohmann::json& j, PolicySketch& v);
void to_json(nlohmann::json& j, const AnswerPosterior& v);
void from_json(const nlohmann::json& j, AnswerPosterior& v);
void to_json(nlohmann::json& j, const Conditioning& v);
void from_json(const nlohmann::json& j, Conditioning& v);
void to_json(nlohmann::json& j, const ReasoningOutcome& v);
void from_json(const nlohmann::json& j, ReasoningOutcome& v);
void to_json(nlohmann::json& j, const ObjectiveWeights& v);
void from_json(const nlohmann::json& j, ObjectiveWeights& v);

}  // namespace intentsketch
