#include <fstream>
#include <sstream>

#include "intentsketch/digest.hpp"
#include "intentsketch/mock.hpp"

namespace intentsketch::backends {

using nlohmann::json;

MockReply MockReply::logprobs(std::vector<std::pair<std::string, double>> top) {
    MockReply r;
    r.top_logprobs = std::move(top);
    return r;
}

bool MockRule::matches(const MockCall& call) const {
    if (backend != "*" && backend != call.backend_id) return false;
    switch (match) {
        case Match::any: return true;
        case Match::digest: return sha256_hex(call.prompt).starts_with(pattern);
        case Match::regex:
            if (compiled) return std::regex_search(call.prompt, *compiled);
            return std::regex_search(call.prompt, std::regex(pattern));
    }
    return false;
}

MockScript& MockScript::add(MockRule rule) {
    if (rule.match == MockRule::Match::regex && !rule.compiled) {
        try {
            rule.compiled = std::make_shared<const std::regex>(rule.pattern);
        } catch (const std::regex_error& e) {
            throw Error(ErrorCode::ConfigError, "bad mock regex '" + rule.pattern + "': " + e.what());
        }
    }
    if (!rule.responder && rule.replies.empty()) {
        throw Error(ErrorCode::ConfigError, "mock rule '" + rule.pattern + "' has no reply");
    }
    rules_.push_back(std::move(rule));
    return *this;
}

const MockRule* MockScript::find(const MockCall& call) const {
    for (const auto& r : rules_) {
        if (r.matches(call)) return &r;
    }
    return nullptr;
}

namespace {

std::string rtrim_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

MockRule parse_header(const std::string& line, std::size_t line_no) {
    MockRule rule;
    std::string rest = line.substr(2);
    auto skip_ws = [&rest] {
        const auto p = rest.find_first_not_of(" \t");
        rest = p == std::string::npos ? std::string{} : rest.substr(p);
    };
    skip_ws();
    if (rest.starts_with("backend=")) {
        const auto end = rest.find_first_of(" \t");
        rule.backend = rest.substr(8, end == std::string::npos ? std::string::npos : end - 8);
        rest = end == std::string::npos ? std::string{} : rest.substr(end);
        skip_ws();
    }
    if (rest == "any" || rest.empty()) {
        rule.match = MockRule::Match::any;
    } else if (rest.starts_with("regex=")) {
        rule.match = MockRule::Match::regex;
        rule.pattern = rest.substr(6);
    } else if (rest.starts_with("digest=")) {
        rule.match = MockRule::Match::digest;
        rule.pattern = rest.substr(7);
        while (!rule.pattern.empty() && std::isspace(static_cast<unsigned char>(rule.pattern.back()))) {
            rule.pattern.pop_back();
        }
    } else {
        throw Error(ErrorCode::ParseError, "unrecognized mock rule header: " + line, line_no);
    }
    return rule;
}

}  // namespace

MockScript MockScript::parse(std::istream& in) {
    MockScript script;
    std::optional<MockRule> rule;
    MockReply reply;
    std::string body;
    bool reply_started = false;

    auto finish_reply = [&] {
        if (!reply_started) return;
        if (reply.kind == MockReply::Kind::ok) reply.text = rtrim_newlines(body);
        rule->replies.push_back(std::move(reply));
        reply = MockReply{};
        body.clear();
        reply_started = false;
    };
    auto finish_rule = [&] {
        if (!rule) return;
        finish_reply();
        if (rule->replies.empty()) rule->replies.push_back(MockReply::ok(""));
        script.add(std::move(*rule));
        rule.reset();
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.starts_with("@@")) {
            finish_rule();
            rule = parse_header(line, line_no);
            continue;
        }
        if (!rule) {
            if (line.empty() || line.starts_with("#")) continue;
            throw Error(ErrorCode::ParseError, "text outside a mock rule", line_no);
        }
        if (line == "--") {
            reply_started = true;  // an empty alternative is still an alternative
            finish_reply();
            continue;
        }
        if (line.starts_with("!")) {
            reply_started = true;
            std::istringstream words(line.substr(1));
            std::string directive;
            words >> directive;
            if (directive == "logprobs") {
                for (std::string pair; words >> pair;) {
                    const auto eq = pair.rfind('=');
                    if (eq == std::string::npos) {
                        throw Error(ErrorCode::ParseError, "logprob entries look like LABEL=-0.5", line_no);
                    }
                    reply.top_logprobs.emplace_back(pair.substr(0, eq), std::stod(pair.substr(eq + 1)));
                }
            } else if (directive == "status") {
                reply.kind = MockReply::Kind::http_status;
                words >> reply.status;
            } else if (directive == "timeout") {
                reply.kind = MockReply::Kind::timeout;
            } else if (directive == "latency") {
                words >> reply.latency_ms;
            } else if (directive == "raw") {
                reply.kind = MockReply::Kind::raw;
                std::getline(words >> std::ws, reply.raw_body);
            } else {
                throw Error(ErrorCode::ParseError, "unknown mock directive !" + directive, line_no);
            }
            continue;
        }
        reply_started = true;
        body += line;
        body += '\n';
    }
    finish_rule();
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open mock scenario " + path.string());
    return parse(in);
}

MockTransport::MockTransport(std::shared_ptr<const MockScript> script, std::string backend_id)
    : script_(std::move(script)), backend_id_(std::move(backend_id)) {}

namespace {

std::string prompt_of(const json& body) {
    if (auto input = body.find("input"); input != body.end()) return input->get<std::string>();
    const json& content = body.at("messages").back().at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const auto& part : content) {
        if (part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
}

std::vector<std::string> media_of(const json& body) {
    std::vector<std::string> out;
    auto messages = body.find("messages");
    if (messages == body.end()) return out;
    const json& content = messages->back().at("content");
    if (!content.is_array()) return out;
    for (const auto& part : content) {
        if (part.value("type", "") == "media_url") out.push_back(part.at("media_url").at("url").get<std::string>());
    }
    return out;
}

json chat_body(const MockReply& reply) {
    std::string text = reply.text;
    json choice = {{"index", 0}, {"finish_reason", "stop"}};
    if (!reply.top_logprobs.empty()) {
        auto best = reply.top_logprobs.front();
        for (const auto& e : reply.top_logprobs) {
            if (e.second > best.second) best = e;
        }
        if (text.empty()) text = best.first;
        json top = json::array();
        for (const auto& [tok, lp] : reply.top_logprobs) top.push_back(json{{"token", tok}, {"logprob", lp}});
        choice["logprobs"] = json{
            {"content", json::array({json{{"token", best.first}, {"logprob", best.second}, {"top_logprobs", top}}})}};
    }
    choice["message"] = json{{"role", "assistant"}, {"content", text}};
    return json{{"object", "chat.completion"}, {"choices", json::array({choice})}};
}

}  // namespace

TransportReply MockTransport::post(const std::string& endpoint, const json& body) {
    MockCall call;
    call.backend_id = backend_id_;
    call.endpoint = endpoint;
    call.prompt = prompt_of(body);
    call.media = media_of(body);
    if (auto seed = body.find("seed"); seed != body.end()) call.seed = seed->get<std::int64_t>();
    call.temperature = body.value("temperature", 0.0);
    call.wants_logprobs = body.value("logprobs", false);
    {
        std::lock_guard lock(mutex_);
        history_.push_back(call);
    }

    if (endpoint == "/embeddings") {
        const auto v = hashing_embedding(call.prompt, 64);
        return TransportReply{200, json{{"data", json::array({json{{"embedding", v}}})}}.dump(), 0};
    }

    const MockRule* rule = script_->find(call);
    if (rule == nullptr) {
        return TransportReply{404,
                              "mock: no scripted reply for backend '" + backend_id_ + "' prompt digest " +
                                  sha256_hex(call.prompt).substr(0, 16),
                              0};
    }
    MockReply reply;
    if (rule->responder) {
        reply = rule->responder(call);
    } else {
        const auto n = static_cast<std::uint64_t>(rule->replies.size());
        reply = rule->replies[static_cast<std::uint64_t>(call.seed.value_or(0)) % n];
    }

    switch (reply.kind) {
        case MockReply::Kind::timeout: throw TransportFailure("mock: simulated timeout");
        case MockReply::Kind::http_status: return TransportReply{reply.status, "mock: scripted status", reply.latency_ms};
        case MockReply::Kind::raw: return TransportReply{200, reply.raw_body, reply.latency_ms};
        case MockReply::Kind::ok: break;
    }
    return TransportReply{200, chat_body(reply).dump(), reply.latency_ms};
}

std::size_t MockTransport::calls() const {
    std::lock_guard lock(mutex_);
    return history_.size();
}

std::vector<MockCall> MockTransport::history() const {
    std::lock_guard lock(mutex_);
    return history_;
}

}  // namespace intentsketch::backends
