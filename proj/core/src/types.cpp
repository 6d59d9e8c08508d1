#include "intentsketch/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "intentsketch/infomath.hpp"

namespace intentsketch {

using nlohmann::json;

std::vector<std::string> OmniInput::slot_labels() const {
    std::vector<std::string> labels;
    labels.reserve(options.size());
    for (const auto& o : options) labels.push_back(o.label);
    return labels;
}

const OmniInput& validate_input(const OmniInput& item) {
    if (item.query.empty()) {
        throw Error(ErrorCode::EmptyQuery, "item '" + item.id + "' has an empty query");
    }
    if (item.options.size() == 1) {
        throw Error(ErrorCode::TooFewOptions, "item '" + item.id + "' has a single option");
    }
    std::set<std::string> labels;
    for (const auto& o : item.options) {
        if (!labels.insert(o.label).second) {
            throw Error(ErrorCode::DuplicateSlotLabel,
                        "item '" + item.id + "' repeats label '" + o.label + "'");
        }
    }
    if (item.gold && !item.options.empty() && !labels.contains(*item.gold)) {
        throw Error(ErrorCode::GoldNotInOptions,
                    "item '" + item.id + "' gold '" + *item.gold + "' is not an option label");
    }
    return item;
}

std::int64_t count_tokens(const std::string& text) {
    std::istringstream in(text);
    std::int64_t n = 0;
    for (std::string tok; in >> tok;) ++n;
    return n;
}

void validate(const ClassDistribution& cd) {
    if (cd.classes.size() != cd.probs.size() || cd.probs.empty()) {
        throw Error(ErrorCode::InvalidDistribution, "class ids and probabilities differ in length");
    }
    double sum = 0.0;
    for (double p : cd.probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorCode::InvalidDistribution, "class probability outside [0,1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > infomath::kNormTolerance) {
        throw Error(ErrorCode::InvalidDistribution, "class probabilities do not sum to 1");
    }
}

AnswerPosterior make_posterior(std::vector<std::string> slots, std::vector<double> probs,
                               PosteriorSource source) {
    if (slots.size() != probs.size()) {
        throw Error(ErrorCode::InvalidDistribution, "slots and probabilities differ in length");
    }
    AnswerPosterior p;
    p.slots = std::move(slots);
    p.probs = infomath::checked_normalize(probs);
    p.entropy_nats = infomath::entropy(p.probs);
    p.source = source;
    return p;
}

void validate(const AnswerPosterior& p) {
    if (p.slots.size() != p.probs.size()) {
        throw Error(ErrorCode::InvalidDistribution, "slots and probabilities differ in length");
    }
    double sum = 0.0;
    for (double v : p.probs) {
        if (v < 0.0) throw Error(ErrorCode::InvalidDistribution, "negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > infomath::kNormTolerance) {
        throw Error(ErrorCode::InvalidDistribution, "posterior is not normalized");
    }
    if (std::abs(p.entropy_nats - infomath::entropy(p.probs)) > 1e-9) {
        throw Error(ErrorCode::InvalidDistribution, "entropy does not match probabilities");
    }
}

void validate(const ObjectiveWeights& w) {
    if (!(w.alpha > 0.0) || !(w.gamma > 0.0)) {
        throw Error(ErrorCode::InvalidWeights, "alpha and gamma must be strictly positive");
    }
}

std::string_view to_string(PosteriorSource s) noexcept {
    return s == PosteriorSource::logprob ? "logprob" : "sampled";
}

PosteriorSource posterior_source_from_string(std::string_view s) {
    if (s == "logprob") return PosteriorSource::logprob;
    if (s == "sampled") return PosteriorSource::sampled;
    throw Error(ErrorCode::ParseError, "unknown posterior source '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

void to_json(json& j, const AnswerOption& v) { j = json{{"label", v.label}, {"text", v.text}}; }

void from_json(const json& j, AnswerOption& v) {
    j.at("label").get_to(v.label);
    v.text = j.value("text", std::string{});
}

void to_json(json& j, const OmniInput& v) {
    j = json{{"id", v.id}, {"query", v.query}, {"options", v.options}};
    put_optional(j, "gold", v.gold);
    put_optional(j, "video", v.video);
    put_optional(j, "audio", v.audio);
    if (!v.meta.empty()) j["meta"] = v.meta;
}

void from_json(const json& j, OmniInput& v) {
    static const std::set<std::string> known{"id", "query", "options", "gold", "video", "audio", "meta"};
    v.id = j.value("id", std::string{});
    j.at("query").get_to(v.query);
    v.options = j.value("options", std::vector<AnswerOption>{});
    v.gold = get_optional<std::string>(j, "gold");
    v.video = get_optional<std::string>(j, "video");
    v.audio = get_optional<std::string>(j, "audio");
    v.meta = j.value("meta", json::object());
    if (!v.meta.is_object()) {
        throw Error(ErrorCode::ParseError, "meta must be an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) v.meta[it.key()] = it.value();
    }
}

void to_json(json& j, const IntentRepresentation& v) {
    j = json{{"text", v.text}, {"source_backend", v.source_backend}, {"token_count", v.token_count}};
}

void from_json(const json& j, IntentRepresentation& v) {
    j.at("text").get_to(v.text);
    v.source_backend = j.value("source_backend", std::string{});
    v.token_count = j.value("token_count", std::int64_t{0});
}

void to_json(json& j, const ClassDistribution& v) {
    j = json{{"classes", v.classes}, {"probs", v.probs}};
}

void from_json(const json& j, ClassDistribution& v) {
    j.at("classes").get_to(v.classes);
    j.at("probs").get_to(v.probs);
}

void to_json(json& j, const PolicySketch& v) {
    j = json{{"index", v.index}, {"text", v.text}};
    put_optional(j, "emphasis_tag", v.emphasis_tag);
    put_optional(j, "class_profile", v.class_profile);
}

void from_json(const json& j, PolicySketch& v) {
    j.at("index").get_to(v.index);
    j.at("text").get_to(v.text);
    v.emphasis_tag = get_optional<std::string>(j, "emphasis_tag");
    v.class_profile = get_optional<ClassDistribution>(j, "class_profile");
}

void to_json(json& j, const AnswerPosterior& v) {
    j = json{{"slots", v.slots},
             {"probs", v.probs},
             {"entropy_nats", v.entropy_nats},
             {"source", to_string(v.source)}};
}

void from_json(const json& j, AnswerPosterior& v) {
    j.at("slots").get_to(v.slots);
    j.at("probs").get_to(v.probs);
    j.at("entropy_nats").get_to(v.entropy_nats);
    v.source = posterior_source_from_string(j.at("source").get<std::string>());
}

void to_json(json& j, const Conditioning& v) { j = json{{"text", v.text}}; }

void from_json(const json& j, Conditioning& v) { v.text = j.value("text", std::string{}); }

void to_json(json& j, const ReasoningOutcome& v) {
    j = json{{"answer", v.answer},
             {"trace", v.trace},
             {"selected_sketch_index", v.selected_sketch_index},
             {"per_candidate_entropies", v.per_candidate_entropies},
             {"sketches", v.sketches},
             {"latency_ms", v.latency_ms}};
    put_optional(j, "intent", v.intent);
}

void from_json(const json& j, ReasoningOutcome& v) {
    j.at("answer").get_to(v.answer);
    v.trace = j.value("trace", std::string{});
    v.selected_sketch_index = j.value("selected_sketch_index", -1);
    v.per_candidate_entropies = j.value("per_candidate_entropies", std::vector<double>{});
    v.sketches = j.value("sketches", std::vector<std::string>{});
    v.intent = get_optional<std::string>(j, "intent");
    v.latency_ms = j.value("latency_ms", std::int64_t{0});
}

void to_json(json& j, const ObjectiveWeights& v) { j = json{{"alpha", v.alpha}, {"gamma", v.gamma}}; }

void from_json(const json& j, ObjectiveWeights& v) {
    v.alpha = j.value("alpha", 0.5);
    v.gamma = j.value("gamma", 1.0);
}

}  // namespace intentsketch
