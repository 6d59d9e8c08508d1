#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "intentsketch/backends.hpp"

// Deterministic offline backend. A MockScript maps prompts (by regex or by
// SHA-256 digest prefix) to scripted replies; MockTransport answers chat and
// embedding requests from it in the same wire dialect as a real endpoint.
namespace intentsketch::backends {

struct MockCall {
    std::string backend_id;
    std::string endpoint;
    std::string prompt;
    std::vector<std::string> media;
    std::optional<std::int64_t> seed;
    double temperature = 0.0;
    bool wants_logprobs = false;
};

struct MockReply {
    enum class Kind { ok, http_status, timeout, raw };

    Kind kind = Kind::ok;
    std::string text;
    std::vector<std::pair<std::string, double>> top_logprobs;  // first answer position
    int status = 200;
    std::string raw_body;  // Kind::raw: returned verbatim with status 200
    std::int64_t latency_ms = 0;

    static MockReply ok(std::string text) {
        MockReply r;
        r.text = std::move(text);
        return r;
    }
    static MockReply logprobs(std::vector<std::pair<std::string, double>> top);
};

struct MockRule {
    enum class Match { any, regex, digest };

    std::string backend = "*";
    Match match = Match::any;
    std::string pattern;
    std::vector<MockReply> replies;                      // chosen by seed modulo size
    std::function<MockReply(const MockCall&)> responder;  // overrides replies when set

    bool matches(const MockCall& call) const;

    std::shared_ptr<const std::regex> compiled;  // filled by MockScript::add
};

class MockScript {
public:
    MockScript& add(MockRule rule);
    /// First matching rule wins.
    const MockRule* find(const MockCall& call) const;

    /// Scenario text format:
    ///   @@ [backend=<id>] (any | regex=<pattern to end of line> | digest=<hex prefix>)
    ///   reply body lines...
    ///   --                      (separates alternative replies)
    ///   !logprobs A=-0.2 B=-1.6 (top logprobs at the answer position)
    ///   !status 500 | !timeout | !latency 12
    /// Lines starting with '#' outside a reply body are comments.
    static MockScript parse(std::istream& in);
    static MockScript load(const std::filesystem::path& path);

private:
    std::vector<MockRule> rules_;
};

class MockTransport : public Transport {
public:
    MockTransport(std::shared_ptr<const MockScript> script, std::string backend_id);

    TransportReply post(const std::string& endpoint, const nlohmann::json& body) override;

    std::size_t calls() const;
    std::vector<MockCall> history() const;

private:
    std::shared_ptr<const MockScript> script_;
    std::string backend_id_;
    mutable std::mutex mutex_;
    std::vector<MockCall> history_;
};

}  // namespace intentsketch::backends
