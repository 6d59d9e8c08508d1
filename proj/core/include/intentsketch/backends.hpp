#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentsketch/types.hpp"

namespace intentsketch::backends {

enum class RequestKind { complete, slot_likelihoods, embed, judge };

std::string_view to_string(RequestKind k) noexcept;

struct RequestParams {
    double temperature = 0.0;
    int max_tokens = 512;
    std::optional<std::int64_t> seed;
    std::optional<std::vector<std::string>> slots;
};

struct BackendRequest {
    std::string backend_id;
    RequestKind kind = RequestKind::complete;
    std::string prompt;
    std::vector<std::string> media;
    RequestParams params;
};

/// Canonical JSON of a request: sorted keys, media replaced by digests,
/// slot labels trimmed. Prompt bytes are kept as-is.
nlohmann::json canonical_request(const BackendRequest& req);

/// SHA-256 of the canonical request; stable across processes.
std::string cache_key(const BackendRequest& req);

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
    std::string key;
    std::string value;
    std::int64_t created_at = 0;  // unix seconds
};

/// Content-addressed response cache. With a directory, every entry is also
/// persisted as `<dir>/<key>.json`, written to a temporary file and renamed
/// into place; existing entry files are loaded lazily on lookup.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CacheEntry> get(const std::string& key) const;
    void put(const std::string& key, const std::string& value);

    std::size_t size() const;
    const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

private:
    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, CacheEntry> entries_;
};

// ---------------------------------------------------------------------------
// Transport

struct TransportReply {
    int status = 200;
    std::string body;
    std::int64_t latency_ms = 0;
};

/// Connection-level failure (timeout, reset, refused). Always retryable.
class TransportFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// POSTs a JSON body to `endpoint` (e.g. "/chat/completions").
    virtual TransportReply post(const std::string& endpoint, const nlohmann::json& body) = 0;
};

/// When set, any attempt to open a network connection aborts the process.
/// Also enabled by the environment variable INTENTSKETCH_FORBID_NETWORK=1.
void forbid_network(bool forbidden);
bool network_forbidden();

/// Chat-completion client over HTTP(S) with bearer auth taken from an
/// environment variable.
class HttpTransport : public Transport {
public:
    HttpTransport(std::string base_url, std::string api_key_env_var,
                  std::chrono::seconds timeout = std::chrono::seconds(120));

    TransportReply post(const std::string& endpoint, const nlohmann::json& body) override;

private:
    std::string base_url_;
    std::string api_key_env_var_;
    std::chrono::seconds timeout_;
};

/// Aborts on use; bind it where a test must prove no backend traffic happens.
class AbortingTransport : public Transport {
public:
    TransportReply post(const std::string& endpoint, const nlohmann::json& body) override;
};

// ---------------------------------------------------------------------------
// Backend

struct BackendConfig {
    std::string backend_id;
    std::string base_url;
    std::string api_key_env_var;
    std::string model_name;
    bool supports_logprobs = false;
    bool supports_media = false;
    bool supports_embeddings = false;
    bool supports_sampling = true;
    int concurrency_limit = 4;
    int max_attempts = 3;
    int backoff_initial_ms = 200;
    int top_logprobs = 20;
    int sample_count = 8;
};

void from_json(const nlohmann::json& j, BackendConfig& c);
void to_json(nlohmann::json& j, const BackendConfig& c);

/// Reads `[ {...}, ... ]` or `{"backends": [...]}`. Error{ConfigError}.
std::vector<BackendConfig> load_backend_configs(const std::filesystem::path& path);

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
    std::vector<std::pair<std::string, double>> top;
};

struct Completion {
    std::string text;
    std::vector<TokenLogprob> logprobs;
    std::int64_t latency_ms = 0;
    bool from_cache = false;
};

/// Request body in the chat-completion dialect.
nlohmann::json build_chat_body(const BackendConfig& cfg, const BackendRequest& req, bool want_logprobs);

/// Throws Error{MalformedResponse} on anything but a well-formed completion.
Completion parse_chat_response(const std::string& body);

/// Posterior from the first answer position whose top logprobs name a slot.
AnswerPosterior posterior_from_logprobs(const std::vector<TokenLogprob>& logprobs,
                                        const std::vector<std::string>& slots);

/// Label named by a reply: the last "ANSWER: X" trailer, else a leading label.
std::optional<std::string> parse_slot_label(std::string_view text, const std::vector<std::string>& slots);

/// Deterministic bag-of-tokens embedding (signed FNV buckets), unit norm.
/// Text without tokens maps to the first basis vector.
std::vector<double> hashing_embedding(std::string_view text, std::size_t dim = 256);

inline constexpr std::string_view kDefaultJudgeTemplate =
    "Do the two reasoning strategies below describe the same line of reasoning?\n"
    "Reply with exactly one word: yes or no.\n\n"
    "Strategy 1:\n{a}\n\nStrategy 2:\n{b}\n\nVerdict:";

/// Counting semaphore bounding in-flight requests.
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(int limit);
    void acquire();
    void release();

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

/// One named model endpoint: cache first, then the transport with bounded
/// retries. Safe for concurrent use.
class Backend {
public:
    Backend(BackendConfig cfg, std::shared_ptr<Transport> transport,
            std::shared_ptr<ResponseCache> cache = nullptr);

    const BackendConfig& config() const noexcept { return cfg_; }
    const std::string& id() const noexcept { return cfg_.backend_id; }

    Completion complete(const BackendRequest& req);
    /// `latency_ms`, when given, accumulates transport-reported latency
    /// (replayed from the cache on hits).
    AnswerPosterior answer_slot_likelihoods(const BackendRequest& req, std::int64_t* latency_ms = nullptr);
    std::vector<double> embed(const BackendRequest& req, std::int64_t* latency_ms = nullptr);
    bool judge_equivalence(std::string_view a, std::string_view b,
                           std::string_view judge_template = kDefaultJudgeTemplate);

    std::size_t transport_calls() const noexcept { return transport_calls_.load(); }
    std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

private:
    Completion fetch_chat(const BackendRequest& req, bool want_logprobs);
    TransportReply send_with_retry(const std::string& endpoint, const nlohmann::json& body);

    BackendConfig cfg_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<ResponseCache> cache_;
    ConcurrencyLimiter limiter_;
    std::atomic<std::size_t> transport_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

class BackendRegistry {
public:
    void add(std::shared_ptr<Backend> backend);
    Backend& get(const std::string& id) const;
    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;
    std::size_t total_transport_calls() const;

private:
    std::map<std::string, std::shared_ptr<Backend>> backends_;
};

}  // namespace intentsketch::backends
