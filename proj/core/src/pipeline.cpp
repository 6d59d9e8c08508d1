#include "intentsketch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <regex>

#include "intentsketch/digest.hpp"
#include "intentsketch/infomath.hpp"
#include "intentsketch/policyset.hpp"

namespace intentsketch::pipeline {

using nlohmann::json;
using backends::BackendRequest;
using backends::RequestKind;

std::string_view to_string(AblationId a) noexcept {
    switch (a) {
        case AblationId::CG: return "CG";
        case AblationId::Abl_NI: return "Abl_NI";
        case AblationId::Abl_SP: return "Abl_SP";
        case AblationId::BaseLine: return "BaseLine";
    }
    return "CG";
}

AblationId ablation_from_string(std::string_view s) {
    if (s == "CG" || s.starts_with("CG_")) return AblationId::CG;
    if (s == "Abl_NI") return AblationId::Abl_NI;
    if (s == "Abl_SP") return AblationId::Abl_SP;
    if (s == "BaseLine") return AblationId::BaseLine;
    throw Error(ErrorCode::ConfigError, "unknown ablation '" + std::string(s) +
                                            "' (expected CG, CG_<label>, Abl_NI, Abl_SP or BaseLine)");
}

void validate(const RunConfig& cfg) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
    if (cfg.num_policies < 1) fail("num_policies must be >= 1");
    if (cfg.oversample_factor < 1) fail("oversample_factor must be >= 1");
    if (cfg.profile_samples < 1) fail("profile_samples must be >= 1");
    if (cfg.free_form_samples < 1) fail("free_form_samples must be >= 1");
    if (cfg.max_parallel < 1) fail("max_parallel must be >= 1");
    if (!(cfg.lexical_threshold > 0.0 && cfg.lexical_threshold <= 1.0)) fail("lexical_threshold must be in (0,1]");
    try {
        validate(cfg.weights);
    } catch (const Error& e) {
        fail(e.detail());
    }
    if (cfg.roles.reasoning_engine.empty()) fail("no reasoning_engine bound");
    if (cfg.front_end_active() && cfg.roles.policy_generator.empty()) fail("no policy_generator bound");
    if (cfg.intent_active() && cfg.roles.intent_perceiver.empty()) fail("no intent_perceiver bound");
}

void to_json(json& j, const RunConfig& cfg) {
    j = json{{"ablation", to_string(cfg.ablation)},
             {"num_policies", cfg.num_policies},
             {"oversample_factor", cfg.oversample_factor},
             {"weights", cfg.weights},
             {"conditioning", cfg.conditioning.text},
             {"roles",
              json{{"intent_perceiver", cfg.roles.intent_perceiver},
                   {"policy_generator", cfg.roles.policy_generator},
                   {"strategy_selector", cfg.roles.strategy_selector},
                   {"reasoning_engine", cfg.roles.reasoning_engine}}},
             {"seed", cfg.seed},
             {"objective_driven", cfg.objective_driven},
             {"profile_samples", cfg.profile_samples},
             {"judge", cfg.judge == JudgeMode::lexical ? "lexical" : "backend"},
             {"lexical_threshold", cfg.lexical_threshold},
             {"generator_temperature", cfg.generator_temperature},
             {"free_form_sampling", cfg.free_form_sampling},
             {"free_form_samples", cfg.free_form_samples},
             {"max_parallel", cfg.max_parallel}};
}

void from_json(const json& j, RunConfig& cfg) {
    try {
        if (j.contains("ablation")) cfg.ablation = ablation_from_string(j.at("ablation").get<std::string>());
        cfg.num_policies = j.value("num_policies", cfg.num_policies);
        cfg.oversample_factor = j.value("oversample_factor", cfg.oversample_factor);
        if (j.contains("weights")) j.at("weights").get_to(cfg.weights);
        if (j.contains("conditioning")) cfg.conditioning.text = j.at("conditioning").get<std::string>();
        if (auto r = j.find("roles"); r != j.end()) {
            cfg.roles.intent_perceiver = r->value("intent_perceiver", cfg.roles.intent_perceiver);
            cfg.roles.policy_generator = r->value("policy_generator", cfg.roles.policy_generator);
            cfg.roles.strategy_selector = r->value("strategy_selector", cfg.roles.strategy_selector);
            cfg.roles.reasoning_engine = r->value("reasoning_engine", cfg.roles.reasoning_engine);
        }
        cfg.seed = j.value("seed", cfg.seed);
        cfg.objective_driven = j.value("objective_driven", cfg.objective_driven);
        cfg.profile_samples = j.value("profile_samples", cfg.profile_samples);
        if (j.contains("judge")) {
            const auto mode = j.at("judge").get<std::string>();
            if (mode == "lexical") cfg.judge = JudgeMode::lexical;
            else if (mode == "backend") cfg.judge = JudgeMode::backend;
            else throw Error(ErrorCode::ConfigError, "judge must be 'lexical' or 'backend'");
        }
        cfg.lexical_threshold = j.value("lexical_threshold", cfg.lexical_threshold);
        cfg.generator_temperature = j.value("generator_temperature", cfg.generator_temperature);
        cfg.free_form_sampling = j.value("free_form_sampling", cfg.free_form_sampling);
        cfg.free_form_samples = j.value("free_form_samples", cfg.free_form_samples);
        cfg.max_parallel = j.value("max_parallel", cfg.max_parallel);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("run config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Run logs

json to_json(const RunLogRecord& r) {
    return json{{"item_id", r.item_id},         {"ablation", r.ablation},
                {"stage", r.stage},             {"backend", r.backend},
                {"prompt_digest", r.prompt_digest}, {"entropies", r.entropies},
                {"selected_index", r.selected_index}, {"answer", r.answer}};
}

void JsonlRunLog::append(const RunLogRecord& record) {
    const std::string line = to_json(record).dump();
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
}

void MemoryRunLog::append(const RunLogRecord& record) {
    std::lock_guard lock(mutex_);
    records_.push_back(record);
}

std::vector<RunLogRecord> MemoryRunLog::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

// ---------------------------------------------------------------------------
// Text contracts

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string strip_label_punct(std::string_view token) {
    std::string out;
    for (char ch : token) {
        if (ch == '(' || ch == ')' || ch == '[' || ch == ']' || ch == '.' || ch == ',' || ch == ':' ||
            ch == '*' || ch == '"' || ch == '\'') {
            continue;
        }
        out.push_back(ch);
    }
    return out;
}

}  // namespace

bool reveals_answer(std::string_view sketch, std::span<const std::string> labels) {
    static const std::regex patterns[] = {
        std::regex(R"(\banswers?\s*(?:is|:|=|would be|should be|must be)\s*(?:option\s+|choice\s+)?[\(\[]?([A-Za-z0-9]+)\b)",
                   std::regex::icase),
        std::regex(R"(\b(?:option|choice)\s*[\(\[]?([A-Za-z0-9]+)[\)\]]?\s+(?:is|seems|looks)\s+(?:to be\s+)?(?:the\s+)?(?:correct|right|answer|best))",
                   std::regex::icase),
        std::regex(R"(\b([A-Za-z0-9]+)[\)\]]?\s+is\s+(?:the\s+)?(?:correct|right)\s+(?:answer|option|choice)\b)",
                   std::regex::icase),
    };
    const std::string text(sketch);
    for (const auto& re : patterns) {
        for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
            const std::string token = (*it)[1].str();
            if (std::find(labels.begin(), labels.end(), token) != labels.end()) return true;
        }
    }
    return false;
}

std::optional<std::string> parse_answer_trailer(std::string_view completion, const OmniInput& x) {
    const auto pos = completion.rfind("ANSWER:");
    if (pos == std::string_view::npos) return std::nullopt;
    auto rest = completion.substr(pos + 7);
    rest = rest.substr(0, rest.find('\n'));
    std::string value = trim(rest);
    while (value.starts_with("**")) value = trim(std::string_view(value).substr(2));
    while (value.ends_with("**")) value = trim(std::string_view(value).substr(0, value.size() - 2));
    if (value.empty()) return std::nullopt;
    if (!x.is_multiple_choice()) return value;

    const auto first_space = value.find_first_of(" \t");
    const std::string label = strip_label_punct(value.substr(0, first_space));
    for (const auto& o : x.options) {
        if (o.label == label) return label;
    }
    return std::nullopt;
}

std::size_t select_min_entropy(std::span<const AnswerPosterior> posteriors) {
    if (posteriors.empty()) throw Error(ErrorCode::AllSketchesRejected, "no posteriors to select from");
    constexpr double kTie = 1e-12;
    auto max_prob = [](const AnswerPosterior& p) { return *std::max_element(p.probs.begin(), p.probs.end()); };
    std::size_t best = 0;
    for (std::size_t i = 1; i < posteriors.size(); ++i) {
        const double h = posteriors[i].entropy_nats;
        const double hb = posteriors[best].entropy_nats;
        if (h < hb - kTie) {
            best = i;
        } else if (std::abs(h - hb) <= kTie && max_prob(posteriors[i]) > max_prob(posteriors[best]) + kTie) {
            best = i;
        }
    }
    return best;
}

std::int64_t derive_seed(std::int64_t run_seed, std::string_view item_id, std::string_view stage, int index) {
    std::string key;
    key.append(std::to_string(run_seed)).push_back('\x1f');
    key.append(item_id).push_back('\x1f');
    key.append(stage).push_back('\x1f');
    key.append(std::to_string(index));
    return static_cast<std::int64_t>(fnv1a64(key) & 0x7fffffffULL);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(const backends::BackendRegistry& registry, PromptBundle prompts, RunLog* log)
    : registry_(registry), prompts_(std::move(prompts)), log_(log) {
    prompts_.validate();
}

void Pipeline::charge(const OmniInput& x, std::int64_t ms) const {
    std::lock_guard lock(latency_mutex_);
    latency_[x.id] += ms;
}

std::int64_t Pipeline::take_latency(const std::string& item_id) const {
    std::lock_guard lock(latency_mutex_);
    auto it = latency_.find(item_id);
    if (it == latency_.end()) return 0;
    const std::int64_t ms = it->second;
    latency_.erase(it);
    return ms;
}

void Pipeline::log(const RunLogRecord& r) const {
    if (log_ != nullptr) log_->append(r);
}

std::map<std::string, std::string> Pipeline::base_values(const OmniInput& x, const RunConfig& cfg,
                                                         const std::optional<IntentRepresentation>& z) const {
    return {
        {"query", x.query},
        {"options", render_options(x)},
        {"media_note", render_media_note(x)},
        {"intent", z ? render_intent_section(z->text) : std::string{}},
        {"conditioning", render_conditioning_section(cfg.conditioning.text)},
        {"sketch", std::string{}},
    };
}

namespace {

RunLogRecord record(const OmniInput& x, const RunConfig& cfg, std::string stage, std::string backend,
                    std::string digest) {
    RunLogRecord r;
    r.item_id = x.id;
    r.ablation = std::string(to_string(cfg.ablation));
    r.stage = std::move(stage);
    r.backend = std::move(backend);
    r.prompt_digest = std::move(digest);
    return r;
}

std::vector<std::string> media_refs(const OmniInput& x) {
    std::vector<std::string> refs;
    if (x.video) refs.push_back(*x.video);
    if (x.audio) refs.push_back(*x.audio);
    return refs;
}

}  // namespace

IntentRepresentation Pipeline::perceive_intent(const OmniInput& x, const RunConfig& cfg) const {
    auto& backend = registry_.get(cfg.roles.intent_perceiver);
    BackendRequest req;
    req.backend_id = backend.id();
    req.kind = RequestKind::complete;
    req.prompt = fill_template(prompts_.perceiver_template, base_values(x, cfg, std::nullopt));
    req.media = media_refs(x);
    req.params.seed = derive_seed(cfg.seed, x.id, "intent", 0);

    const auto completion = backend.complete(req);
    charge(x, completion.latency_ms);
    std::string text = trim(completion.text);
    if (text.empty()) throw Error(ErrorCode::EmptyCompletion, "intent perceiver returned nothing");

    log(record(x, cfg, "intent", backend.id(), sha256_hex(req.prompt)));
    return IntentRepresentation{text, backend.id(), count_tokens(text)};
}

std::vector<PolicySketch> Pipeline::generate_policies(const OmniInput& x, const std::optional<IntentRepresentation>& z,
                                                      const RunConfig& cfg) const {
    auto& gen = registry_.get(cfg.roles.policy_generator);
    const int n = cfg.effective_num_policies();
    const int raw_count = n * cfg.oversample_factor;
    const auto labels = x.slot_labels();

    auto values = base_values(x, cfg, z);
    std::vector<PolicySketch> pool;
    std::string digests;
    int rejected = 0;
    for (int k = 0; k < raw_count; ++k) {
        const std::string tag(kEmphasisTags[static_cast<std::size_t>(k) % kEmphasisTags.size()]);
        values["emphasis"] = tag;
        BackendRequest req;
        req.backend_id = gen.id();
        req.prompt = fill_template(prompts_.generator_template, values);
        req.media = media_refs(x);
        req.params.temperature = cfg.generator_temperature;
        req.params.seed = derive_seed(cfg.seed, x.id, "generate", k);
        digests += sha256_hex(req.prompt);

        const auto completion = gen.complete(req);
        charge(x, completion.latency_ms);
        std::string text = trim(completion.text);
        if (text.empty() || reveals_answer(text, labels)) {
            ++rejected;
            continue;
        }
        pool.push_back(PolicySketch{k, std::move(text), tag, std::nullopt});
    }
    if (pool.empty()) {
        throw Error(ErrorCode::AllSketchesRejected,
                    "all " + std::to_string(raw_count) + " generated sketches were empty or named an answer");
    }

    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(n), pool.size());
    std::vector<std::size_t> chosen(keep);
    std::iota(chosen.begin(), chosen.end(), 0);

    if (cfg.objective_driven) {
        std::vector<std::vector<std::string>> restatements(pool.size());
        std::vector<std::string> all;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            for (int j = 0; j < cfg.profile_samples; ++j) {
                BackendRequest req;
                req.backend_id = gen.id();
                req.prompt = fill_template(prompts_.restate_template,
                                           {{"sketch", render_sketch_section(pool[i].text)}, {"query", x.query}});
                req.params.temperature = 1.0;
                req.params.seed = derive_seed(cfg.seed, x.id, "restate", pool[i].index * 1000 + j);
                const auto completion = gen.complete(req);
                charge(x, completion.latency_ms);
                std::string text = trim(completion.text);
                if (text.empty()) text = pool[i].text;
                restatements[i].push_back(text);
                all.push_back(std::move(text));
            }
        }

        const auto oracle = cfg.judge == JudgeMode::lexical
                                ? policyset::lexical_oracle(cfg.lexical_threshold)
                                : policyset::EquivalenceOracle([&gen, this](std::string_view a, std::string_view b) {
                                      return gen.judge_equivalence(a, b, prompts_.judge_template);
                                  });
        const auto partition = policyset::cluster(all, oracle);
        const auto classes = policyset::GlobalClasses::from_partition(all, partition);

        std::vector<policyset::Candidate> candidates;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            auto profile = policyset::estimate_class_profile(static_cast<int>(i), restatements[i], oracle, classes);
            pool[i].class_profile = profile.distribution;
            BackendRequest er;
            er.backend_id = gen.id();
            er.kind = RequestKind::embed;
            er.prompt = pool[i].text;
            std::int64_t spent = 0;
            auto vector = gen.embed(er, &spent);
            charge(x, spent);
            candidates.push_back(policyset::Candidate{std::move(profile.distribution), std::move(vector)});
        }
        chosen = policyset::select_diverse_subset(candidates, keep, cfg.weights);
    }

    std::vector<PolicySketch> out;
    for (std::size_t pos = 0; pos < chosen.size(); ++pos) {
        PolicySketch s = pool[chosen[pos]];
        s.index = static_cast<int>(pos);
        out.push_back(std::move(s));
    }

    RunLogRecord rec = record(x, cfg, "generate", gen.id(), sha256_hex(digests));
    rec.selected_index = rejected;  // number of sketches dropped by the answer guard
    log(rec);
    return out;
}

std::pair<AnswerPosterior, double> Pipeline::posterior_and_entropy(const OmniInput& x, const PolicySketch& s,
                                                                   const Conditioning& c, const RunConfig& cfg,
                                                                   const std::optional<IntentRepresentation>& z) const {
    auto& evaluator = registry_.get(cfg.roles.selector());
    RunConfig local = cfg;
    local.conditioning = c;
    auto values = base_values(x, local, z);
    values["sketch"] = render_sketch_section(s.text);

    BackendRequest req;
    req.backend_id = evaluator.id();
    req.prompt = fill_template(prompts_.selector_template, values);
    req.media = media_refs(x);
    req.params.max_tokens = 8;
    req.params.seed = derive_seed(cfg.seed, x.id, "select", s.index);

    AnswerPosterior posterior;
    if (x.is_multiple_choice()) {
        req.kind = RequestKind::slot_likelihoods;
        req.params.slots = x.slot_labels();
        std::int64_t spent = 0;
        posterior = evaluator.answer_slot_likelihoods(req, &spent);
        charge(x, spent);
    } else {
        if (!cfg.free_form_sampling) {
            throw Error(ErrorCode::NoLikelihoodSupport, "free-form item without sampling enabled");
        }
        std::vector<std::string> answers;
        for (int k = 0; k < cfg.free_form_samples; ++k) {
            BackendRequest draw = req;
            draw.kind = RequestKind::complete;
            draw.params.temperature = 1.0;
            draw.params.max_tokens = 64;
            draw.params.seed = *req.params.seed + k;
            const auto completion = evaluator.complete(draw);
            charge(x, completion.latency_ms);
            const std::string& text = completion.text;
            std::string answer = parse_answer_trailer(text, x).value_or(trim(text));
            if (!answer.empty()) answers.push_back(std::move(answer));
        }
        if (answers.empty()) throw Error(ErrorCode::EmptyCompletion, "no free-form answers sampled");
        const auto partition = policyset::cluster(answers, policyset::lexical_oracle(cfg.lexical_threshold));
        std::vector<std::string> slots(static_cast<std::size_t>(partition.class_count));
        std::vector<double> counts(slots.size(), 0.0);
        for (std::size_t i = 0; i < answers.size(); ++i) {
            const auto k = static_cast<std::size_t>(partition.class_of[i]);
            if (slots[k].empty()) slots[k] = answers[i];
            counts[k] += 1.0;
        }
        for (double& v : counts) v /= static_cast<double>(answers.size());
        posterior = make_posterior(std::move(slots), std::move(counts), PosteriorSource::sampled);
    }
    const double h = infomath::entropy(posterior.probs);
    RunLogRecord rec = record(x, cfg, "posterior", evaluator.id(), sha256_hex(req.prompt));
    rec.entropies = {h};
    rec.selected_index = s.index;
    log(rec);
    return {posterior, h};
}

Selection Pipeline::select_strategy(const OmniInput& x, std::span<const PolicySketch> sketches, const Conditioning& c,
                                    const RunConfig& cfg, const std::optional<IntentRepresentation>& z) const {
    if (sketches.empty()) throw Error(ErrorCode::AllSketchesRejected, "no sketches to select from");
    if (sketches.size() == 1) return Selection{sketches.front(), 0, {}, {}};

    std::vector<AnswerPosterior> posteriors(sketches.size());
    const auto batch = static_cast<std::size_t>(cfg.max_parallel);
    for (std::size_t start = 0; start < sketches.size(); start += batch) {
        const std::size_t stop = std::min(sketches.size(), start + batch);
        std::vector<std::future<AnswerPosterior>> pending;
        for (std::size_t i = start; i < stop; ++i) {
            pending.push_back(std::async(std::launch::async, [&, i] {
                return posterior_and_entropy(x, sketches[i], c, cfg, z).first;
            }));
        }
        for (std::size_t i = start; i < stop; ++i) posteriors[i] = pending[i - start].get();
    }

    Selection sel;
    sel.position = select_min_entropy(posteriors);
    sel.sketch = sketches[sel.position];
    for (const auto& p : posteriors) sel.entropies.push_back(p.entropy_nats);
    sel.posteriors = std::move(posteriors);

    RunLogRecord rec = record(x, cfg, "select", cfg.roles.selector(), "");
    rec.entropies = sel.entropies;
    rec.selected_index = sel.sketch.index;
    log(rec);
    return sel;
}

ReasoningOutcome Pipeline::solve_with_strategy(const OmniInput& x, const PolicySketch& s, const RunConfig& cfg,
                                               const std::optional<IntentRepresentation>& z) const {
    auto& engine = registry_.get(cfg.roles.reasoning_engine);
    auto values = base_values(x, cfg, z);
    values["sketch"] = render_sketch_section(s.text);

    BackendRequest req;
    req.backend_id = engine.id();
    req.prompt = fill_template(prompts_.reasoner_template, values);
    req.media = media_refs(x);
    req.params.max_tokens = 1024;
    req.params.seed = derive_seed(cfg.seed, x.id, "solve", 0);

    const auto first = engine.complete(req);
    charge(x, first.latency_ms);
    ReasoningOutcome outcome;
    outcome.trace = first.text;
    auto answer = parse_answer_trailer(first.text, x);
    if (!answer) {
        BackendRequest repair = req;
        repair.prompt = fill_template(prompts_.repair_template,
                                      {{"query", x.query},
                                       {"options", render_options(x)},
                                       {"media_note", render_media_note(x)},
                                       {"previous", first.text}});
        repair.params.max_tokens = 16;
        const auto second = engine.complete(repair);
        charge(x, second.latency_ms);
        outcome.trace += "\n" + second.text;
        answer = parse_answer_trailer(second.text, x);
        if (!answer) {
            throw Error(ErrorCode::UnparseableAnswer, "no 'ANSWER: <label>' trailer after one repair attempt");
        }
    }
    outcome.answer = *answer;
    outcome.selected_sketch_index = s.text.empty() ? -1 : s.index;

    RunLogRecord rec = record(x, cfg, "solve", engine.id(), sha256_hex(req.prompt));
    rec.selected_index = outcome.selected_sketch_index;
    rec.answer = outcome.answer;
    log(rec);
    return outcome;
}

namespace {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.with_stage(stage);
    }
}

}  // namespace

ReasoningOutcome Pipeline::run(const OmniInput& x, const RunConfig& cfg) const {
    in_stage("config", [&] {
        validate(cfg);
        validate_input(x);
        return 0;
    });

    // Drop whatever an earlier failed run of this item left behind, and
    // again on the way out if this one fails.
    take_latency(x.id);
    struct Reset {
        const Pipeline& p;
        const std::string& id;
        ~Reset() { p.take_latency(id); }
    } reset{*this, x.id};

    if (!cfg.front_end_active()) {
        auto outcome = in_stage("solve", [&] { return solve_with_strategy(x, PolicySketch{-1, "", {}, {}}, cfg); });
        outcome.latency_ms = take_latency(x.id);
        return outcome;
    }

    std::optional<IntentRepresentation> z;
    if (cfg.intent_active()) {
        z = in_stage("intent", [&] { return perceive_intent(x, cfg); });
    }
    const auto sketches = in_stage("generate", [&] { return generate_policies(x, z, cfg); });
    const auto selection = in_stage("select", [&] { return select_strategy(x, sketches, cfg.conditioning, cfg, z); });
    auto outcome = in_stage("solve", [&] { return solve_with_strategy(x, selection.sketch, cfg, z); });

    outcome.selected_sketch_index = selection.sketch.index;
    outcome.per_candidate_entropies = selection.entropies;
    if (z) outcome.intent = z->text;
    for (const auto& s : sketches) outcome.sketches.push_back(s.text);
    outcome.latency_ms = take_latency(x.id);
    return outcome;
}

}  // namespace intentsketch::pipeline
