#include <cstdlib>
#include <iostream>
#include <regex>

#include <httplib.h>

#include "intentsketch/backends.hpp"

namespace intentsketch::backends {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) {
        throw Error(ErrorCode::ConfigError, "base_url must look like http(s)://host[/path]: " + url);
    }
    std::string prefix = m[2].matched ? m[2].str() : std::string{};
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {m[1].str(), prefix};
}

}  // namespace

HttpTransport::HttpTransport(std::string base_url, std::string api_key_env_var, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), api_key_env_var_(std::move(api_key_env_var)), timeout_(timeout) {
    parse_base_url(base_url_);
}

TransportReply HttpTransport::post(const std::string& endpoint, const nlohmann::json& body) {
    if (network_forbidden()) {
        std::cerr << "fatal: network access to " << base_url_ << endpoint << " while the network is forbidden\n";
        std::abort();
    }
    const ParsedUrl url = parse_base_url(base_url_);
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    if (!api_key_env_var_.empty()) {
        const char* key = std::getenv(api_key_env_var_.c_str());
        if (key == nullptr || *key == '\0') {
            throw Error(ErrorCode::ConfigError, "environment variable " + api_key_env_var_ + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(url.path_prefix + endpoint, headers, body.dump(), "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (!res) {
        throw TransportFailure("HTTP transport error: " + httplib::to_string(res.error()));
    }
    return TransportReply{res->status, res->body, elapsed.count()};
}

}  // namespace intentsketch::backends
