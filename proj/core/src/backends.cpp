#include "intentsketch/backends.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "intentsketch/digest.hpp"

namespace intentsketch::backends {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Network guard

namespace {

std::atomic<bool>& forbid_flag() {
    static std::atomic<bool> flag{[] {
        const char* env = std::getenv("INTENTSKETCH_FORBID_NETWORK");
        return env != nullptr && std::string_view(env) == "1";
    }()};
    return flag;
}

}  // namespace

void forbid_network(bool forbidden) { forbid_flag().store(forbidden); }

bool network_forbidden() { return forbid_flag().load(); }

TransportReply AbortingTransport::post(const std::string& endpoint, const json&) {
    std::cerr << "fatal: backend traffic to '" << endpoint << "' through an AbortingTransport\n";
    std::abort();
}

// ---------------------------------------------------------------------------
// Config

void from_json(const json& j, BackendConfig& c) {
    j.at("backend_id").get_to(c.backend_id);
    c.base_url = j.value("base_url", std::string{});
    c.api_key_env_var = j.value("api_key_env_var", std::string{});
    c.model_name = j.value("model_name", c.backend_id);
    c.supports_logprobs = j.value("supports_logprobs", false);
    c.supports_media = j.value("supports_media", false);
    c.supports_embeddings = j.value("supports_embeddings", false);
    c.supports_sampling = j.value("supports_sampling", true);
    c.concurrency_limit = j.value("concurrency_limit", 4);
    c.max_attempts = std::clamp(j.value("max_attempts", 3), 1, 3);
    c.backoff_initial_ms = j.value("backoff_initial_ms", 200);
    c.top_logprobs = j.value("top_logprobs", 20);
    c.sample_count = j.value("sample_count", 8);
    if (c.concurrency_limit < 1) {
        throw Error(ErrorCode::ConfigError, "concurrency_limit must be >= 1 for " + c.backend_id);
    }
}

void to_json(json& j, const BackendConfig& c) {
    j = json{{"backend_id", c.backend_id},
             {"base_url", c.base_url},
             {"api_key_env_var", c.api_key_env_var},
             {"model_name", c.model_name},
             {"supports_logprobs", c.supports_logprobs},
             {"supports_media", c.supports_media},
             {"supports_embeddings", c.supports_embeddings},
             {"supports_sampling", c.supports_sampling},
             {"concurrency_limit", c.concurrency_limit},
             {"max_attempts", c.max_attempts},
             {"backoff_initial_ms", c.backoff_initial_ms},
             {"top_logprobs", c.top_logprobs},
             {"sample_count", c.sample_count}};
}

std::vector<BackendConfig> load_backend_configs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open backend config " + path.string());
    try {
        json j = json::parse(in);
        if (j.is_object()) j = j.at("backends");
        auto configs = j.get<std::vector<BackendConfig>>();
        std::set<std::string> seen;
        for (const auto& c : configs) {
            if (!seen.insert(c.backend_id).second) {
                throw Error(ErrorCode::ConfigError, "duplicate backend_id " + c.backend_id);
            }
        }
        return configs;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Wire dialect

json build_chat_body(const BackendConfig& cfg, const BackendRequest& req, bool want_logprobs) {
    json content;
    if (cfg.supports_media && !req.media.empty()) {
        content = json::array({json{{"type", "text"}, {"text", req.prompt}}});
        for (const auto& m : req.media) {
            content.push_back(json{{"type", "media_url"}, {"media_url", json{{"url", m}}}});
        }
    } else {
        content = req.prompt;
    }
    json body = {{"model", cfg.model_name},
                 {"messages", json::array({json{{"role", "user"}, {"content", std::move(content)}}})},
                 {"temperature", req.params.temperature},
                 {"max_tokens", req.params.max_tokens}};
    if (req.params.seed) body["seed"] = *req.params.seed;
    if (want_logprobs) {
        body["logprobs"] = true;
        body["top_logprobs"] = cfg.top_logprobs;
    }
    return body;
}

Completion parse_chat_response(const std::string& body) {
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::MalformedResponse, "response body is not JSON");
    }
    try {
        const json& choice = j.at("choices").at(0);
        Completion c;
        const json& content = choice.at("message").at("content");
        c.text = content.is_null() ? std::string{} : content.get<std::string>();
        if (auto lp = choice.find("logprobs"); lp != choice.end() && lp->is_object()) {
            for (const auto& tok : lp->value("content", json::array())) {
                TokenLogprob t;
                t.token = tok.at("token").get<std::string>();
                t.logprob = tok.at("logprob").get<double>();
                for (const auto& alt : tok.value("top_logprobs", json::array())) {
                    t.top.emplace_back(alt.at("token").get<std::string>(), alt.at("logprob").get<double>());
                }
                c.logprobs.push_back(std::move(t));
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedResponse, std::string("unexpected completion shape: ") + e.what());
    }
}

namespace {

std::string strip_label(std::string_view token) {
    std::string out;
    for (char ch : token) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c) || ch == '(' || ch == ')' || ch == '.' || ch == ':' || ch == '*' ||
            ch == '[' || ch == ']' || ch == '"' || ch == '\'') {
            continue;
        }
        out.push_back(ch);
    }
    return out;
}

}  // namespace

AnswerPosterior posterior_from_logprobs(const std::vector<TokenLogprob>& logprobs,
                                        const std::vector<std::string>& slots) {
    for (const auto& position : logprobs) {
        std::vector<std::pair<std::string, double>> entries = position.top;
        if (entries.empty()) entries.emplace_back(position.token, position.logprob);

        std::vector<double> mass(slots.size(), 0.0);
        std::set<std::string> counted;
        bool any = false;
        for (const auto& [token, lp] : entries) {
            if (!counted.insert(token).second) continue;
            const std::string label = strip_label(token);
            auto it = std::find(slots.begin(), slots.end(), label);
            if (it == slots.end()) continue;
            mass[static_cast<std::size_t>(it - slots.begin())] += std::exp(lp);
            any = true;
        }
        if (!any) continue;
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        for (double& m : mass) m /= total;
        return make_posterior(slots, std::move(mass), PosteriorSource::logprob);
    }
    throw Error(ErrorCode::MalformedResponse, "no answer slot among the returned logprobs");
}

std::optional<std::string> parse_slot_label(std::string_view text, const std::vector<std::string>& slots) {
    static const std::regex trailer(R"(ANSWER\s*:\s*\(?\s*([^\s\)\.]+))", std::regex::icase);
    std::optional<std::string> found;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), trailer); it != std::sregex_iterator(); ++it) {
        found = strip_label((*it)[1].str());
    }
    if (found && std::find(slots.begin(), slots.end(), *found) != slots.end()) return found;

    std::istringstream words(s);
    std::string first;
    if (words >> first) {
        const std::string label = strip_label(first);
        if (std::find(slots.begin(), slots.end(), label) != slots.end()) return label;
    }
    return std::nullopt;
}

std::vector<double> hashing_embedding(std::string_view text, std::size_t dim) {
    std::vector<double> v(dim, 0.0);
    std::string cur;
    bool any = false;
    auto flush = [&] {
        if (cur.empty()) return;
        const std::uint64_t h = fnv1a64(cur);
        v[h % dim] += (h >> 63) != 0 ? -1.0 : 1.0;
        any = true;
        cur.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();

    double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (!any || norm == 0.0) {
        // Tokens that cancel exactly, or no tokens at all.
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

// ---------------------------------------------------------------------------
// Backend

ConcurrencyLimiter::ConcurrencyLimiter(int limit) : available_(std::max(limit, 1)) {}

void ConcurrencyLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

namespace {

struct LimiterGuard {
    explicit LimiterGuard(ConcurrencyLimiter& l) : limiter(l) { limiter.acquire(); }
    ~LimiterGuard() { limiter.release(); }
    LimiterGuard(const LimiterGuard&) = delete;
    LimiterGuard& operator=(const LimiterGuard&) = delete;
    ConcurrencyLimiter& limiter;
};

std::string cached_value(const TransportReply& reply) {
    return json{{"body", reply.body}, {"latency_ms", reply.latency_ms}}.dump();
}

TransportReply from_cached_value(const std::string& value) {
    const json j = json::parse(value);
    return TransportReply{200, j.at("body").get<std::string>(), j.value("latency_ms", std::int64_t{0})};
}

}  // namespace

Backend::Backend(BackendConfig cfg, std::shared_ptr<Transport> transport, std::shared_ptr<ResponseCache> cache)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      cache_(std::move(cache)),
      limiter_(cfg_.concurrency_limit) {
    if (!transport_) throw Error(ErrorCode::ConfigError, "backend " + cfg_.backend_id + " has no transport");
}

TransportReply Backend::send_with_retry(const std::string& endpoint, const json& body) {
    const int attempts = std::clamp(cfg_.max_attempts, 1, 3);
    ErrorCode last = ErrorCode::TransportError;
    std::string last_message;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1 && cfg_.backoff_initial_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_initial_ms << (attempt - 2)));
        }
        TransportReply reply;
        try {
            LimiterGuard guard(limiter_);
            ++transport_calls_;
            reply = transport_->post(endpoint, body);
        } catch (const TransportFailure& e) {
            last = ErrorCode::TransportError;
            last_message = e.what();
            continue;
        }
        if (reply.status >= 200 && reply.status < 300) return reply;
        if (reply.status == 429) {
            last = ErrorCode::RateLimited;
            last_message = "HTTP 429";
            continue;
        }
        if (reply.status >= 500) {
            last = ErrorCode::TransportError;
            last_message = "HTTP " + std::to_string(reply.status);
            continue;
        }
        throw Error(ErrorCode::BackendError, cfg_.backend_id + ": HTTP " + std::to_string(reply.status) +
                                                 ": " + reply.body.substr(0, 300));
    }
    throw Error(last, cfg_.backend_id + ": giving up after " + std::to_string(attempts) +
                          " attempts: " + last_message);
}

Completion Backend::fetch_chat(const BackendRequest& req, bool want_logprobs) {
    const std::string key = cache_key(req);
    if (cache_) {
        if (auto hit = cache_->get(key)) {
            const TransportReply reply = from_cached_value(hit->value);
            Completion c = parse_chat_response(reply.body);
            c.latency_ms = reply.latency_ms;
            c.from_cache = true;
            ++cache_hits_;
            return c;
        }
    }
    const TransportReply reply = send_with_retry("/chat/completions", build_chat_body(cfg_, req, want_logprobs));
    Completion c = parse_chat_response(reply.body);
    c.latency_ms = reply.latency_ms;
    if (cache_) cache_->put(key, cached_value(reply));
    return c;
}

Completion Backend::complete(const BackendRequest& req) {
    if (req.kind != RequestKind::complete && req.kind != RequestKind::judge) {
        throw Error(ErrorCode::BackendError, "complete() called with a " + std::string(to_string(req.kind)) +
                                                 " request");
    }
    return fetch_chat(req, false);
}

AnswerPosterior Backend::answer_slot_likelihoods(const BackendRequest& req, std::int64_t* latency_ms) {
    std::int64_t spent = 0;
    if (!req.params.slots || req.params.slots->size() < 2) {
        throw Error(ErrorCode::NoLikelihoodSupport, "answer-slot likelihoods need at least two slots");
    }
    const auto& slots = *req.params.slots;
    if (cfg_.supports_logprobs) {
        BackendRequest lp = req;
        lp.kind = RequestKind::slot_likelihoods;
        const Completion c = fetch_chat(lp, true);
        if (latency_ms != nullptr) *latency_ms += c.latency_ms;
        return posterior_from_logprobs(c.logprobs, slots);
    }
    if (!cfg_.supports_sampling || cfg_.sample_count < 1) {
        throw Error(ErrorCode::NoLikelihoodSupport, cfg_.backend_id + " offers neither logprobs nor sampling");
    }

    std::vector<double> counts(slots.size(), 1.0);  // add-one smoothing
    const std::int64_t base_seed = req.params.seed.value_or(0);
    for (int k = 0; k < cfg_.sample_count; ++k) {
        BackendRequest draw = req;
        draw.kind = RequestKind::complete;
        draw.params.temperature = 1.0;
        draw.params.seed = base_seed + k;
        const Completion c = fetch_chat(draw, false);
        spent += c.latency_ms;
        if (auto label = parse_slot_label(c.text, slots)) {
            const auto idx = static_cast<std::size_t>(std::find(slots.begin(), slots.end(), *label) - slots.begin());
            counts[idx] += 1.0;
        }
    }
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (double& c : counts) c /= total;
    if (latency_ms != nullptr) *latency_ms += spent;
    return make_posterior(slots, std::move(counts), PosteriorSource::sampled);
}

std::vector<double> Backend::embed(const BackendRequest& req, std::int64_t* latency_ms) {
    if (!cfg_.supports_embeddings) return hashing_embedding(req.prompt);

    BackendRequest er = req;
    er.kind = RequestKind::embed;
    const std::string key = cache_key(er);
    TransportReply reply;
    if (auto hit = cache_ ? cache_->get(key) : std::nullopt) {
        reply = from_cached_value(hit->value);
        ++cache_hits_;
    } else {
        reply = send_with_retry("/embeddings", json{{"model", cfg_.model_name}, {"input", req.prompt}});
    }
    const json j = json::parse(reply.body, nullptr, false);
    std::vector<double> v;
    try {
        if (j.is_discarded()) throw Error(ErrorCode::MalformedResponse, "embedding body is not JSON");
        v = j.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedResponse, std::string("unexpected embedding shape: ") + e.what());
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (v.empty() || norm == 0.0) throw Error(ErrorCode::MalformedResponse, "zero embedding");
    for (double& x : v) x /= norm;
    if (latency_ms != nullptr) *latency_ms += reply.latency_ms;
    if (cache_ && !cache_->get(key)) cache_->put(key, cached_value(reply));
    return v;
}

bool Backend::judge_equivalence(std::string_view a, std::string_view b, std::string_view judge_template) {
    if (a.empty() || b.empty()) {
        throw Error(ErrorCode::BackendError, "judge_equivalence needs two non-empty texts");
    }
    if (a == b) return true;
    if (b < a) std::swap(a, b);

    std::string prompt(judge_template);
    auto replace = [&prompt](std::string_view token, std::string_view value) {
        for (auto pos = prompt.find(token); pos != std::string::npos; pos = prompt.find(token, pos + value.size())) {
            prompt.replace(pos, token.size(), value);
        }
    };
    replace("{a}", a);
    replace("{b}", b);

    BackendRequest req;
    req.backend_id = cfg_.backend_id;
    req.kind = RequestKind::judge;
    req.prompt = std::move(prompt);
    req.params.temperature = 0.0;
    req.params.max_tokens = 4;
    const Completion c = fetch_chat(req, false);

    std::string verdict;
    for (char ch : c.text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalpha(u)) verdict.push_back(static_cast<char>(std::tolower(u)));
        else if (!std::isspace(u) && ch != '.' && ch != '!') verdict.push_back(ch);
    }
    if (verdict == "yes") return true;
    if (verdict == "no") return false;
    throw Error(ErrorCode::UnparseableVerdict, "judge replied '" + c.text + "'");
}

// ---------------------------------------------------------------------------
// Registry

void BackendRegistry::add(std::shared_ptr<Backend> backend) {
    const std::string id = backend->id();
    if (!backends_.emplace(id, std::move(backend)).second) {
        throw Error(ErrorCode::ConfigError, "duplicate backend " + id);
    }
}

Backend& BackendRegistry::get(const std::string& id) const {
    auto it = backends_.find(id);
    if (it == backends_.end()) throw Error(ErrorCode::ConfigError, "unknown backend '" + id + "'");
    return *it->second;
}

bool BackendRegistry::contains(const std::string& id) const { return backends_.contains(id); }

std::vector<std::string> BackendRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : backends_) out.push_back(id);
    return out;
}

std::size_t BackendRegistry::total_transport_calls() const {
    std::size_t n = 0;
    for (const auto& [_, b] : backends_) n += b->transport_calls();
    return n;
}

}  // namespace intentsketch::backends
