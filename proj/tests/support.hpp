#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "intentsketch/backends.hpp"
#include "intentsketch/mock.hpp"
#include "intentsketch/types.hpp"

namespace testing_support {

namespace is = intentsketch;
namespace ib = intentsketch::backends;

inline is::OmniInput mc_item(std::string id = "it-1", std::string gold = "A", int n_options = 4) {
    is::OmniInput x;
    x.id = std::move(id);
    x.query = "Why does the person stop walking?";
    x.video = "clips/" + x.id + ".mp4";
    const char* texts[] = {"a sound behind them", "they are tired", "the light changes", "someone calls"};
    for (int k = 0; k < n_options; ++k) {
        x.options.push_back({std::string(1, static_cast<char>('A' + k)), texts[k % 4]});
    }
    x.gold = std::move(gold);
    return x;
}

/// A registry of mock backends over one shared script. Every backend keeps
/// its own transport so tests can count and inspect calls per role.
struct MockEnv {
    std::shared_ptr<ib::MockScript> script = std::make_shared<ib::MockScript>();
    ib::BackendRegistry registry;
    std::map<std::string, std::shared_ptr<ib::MockTransport>> transports;
    std::shared_ptr<ib::ResponseCache> cache;

    explicit MockEnv(std::shared_ptr<ib::ResponseCache> c = nullptr) : cache(std::move(c)) {}

    ib::Backend& add(const std::string& id, bool logprobs = true) {
        ib::BackendConfig cfg;
        cfg.backend_id = id;
        cfg.model_name = id;
        cfg.base_url = "http://mock.invalid/v1";
        cfg.api_key_env_var = "INTENTSKETCH_TEST_KEY";
        cfg.supports_logprobs = logprobs;
        cfg.supports_media = true;
        cfg.backoff_initial_ms = 0;
        auto t = std::make_shared<ib::MockTransport>(script, id);
        transports[id] = t;
        registry.add(std::make_shared<ib::Backend>(cfg, t, cache));
        return registry.get(id);
    }

    std::size_t calls(const std::string& id) const { return transports.at(id)->calls(); }
    std::vector<ib::MockCall> history(const std::string& id) const { return transports.at(id)->history(); }

    void rule(const std::string& regex, std::vector<ib::MockReply> replies, const std::string& backend = "*") {
        ib::MockRule r;
        r.backend = backend;
        r.match = ib::MockRule::Match::regex;
        r.pattern = regex;
        r.replies = std::move(replies);
        script->add(std::move(r));
    }

    void responder(const std::string& regex, std::function<ib::MockReply(const ib::MockCall&)> f,
                   const std::string& backend = "*") {
        ib::MockRule r;
        r.backend = backend;
        r.match = ib::MockRule::Match::regex;
        r.pattern = regex;
        r.responder = std::move(f);
        script->add(std::move(r));
    }
};

/// Logprob reply putting probabilities proportional to `weights` on A, B, C, D.
inline ib::MockReply weights_reply(const std::vector<double>& weights) {
    std::vector<std::pair<std::string, double>> top;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        top.emplace_back(std::string(1, static_cast<char>('A' + k)), std::log(weights[k]));
    }
    return ib::MockReply::logprobs(std::move(top));
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& v : p) s += (v = e(rng));
    for (auto& v : p) v /= s;
    return p;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("intentsketch-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing_support
