#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "intentsketch/backends.hpp"
#include "intentsketch/digest.hpp"

namespace intentsketch::backends {

using nlohmann::json;

std::string_view to_string(RequestKind k) noexcept {
    switch (k) {
        case RequestKind::complete: return "complete";
        case RequestKind::slot_likelihoods: return "slot_likelihoods";
        case RequestKind::embed: return "embed";
        case RequestKind::judge: return "judge";
    }
    return "complete";
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

json canonical_request(const BackendRequest& req) {
    json media = json::array();
    for (const auto& m : req.media) media.push_back(sha256_hex(m));

    json params = {{"temperature", req.params.temperature}, {"max_tokens", req.params.max_tokens}};
    params["seed"] = req.params.seed ? json(*req.params.seed) : json(nullptr);
    if (req.params.slots) {
        json slots = json::array();
        for (const auto& s : *req.params.slots) slots.push_back(trim(s));
        params["slots"] = std::move(slots);
    } else {
        params["slots"] = nullptr;
    }
    // nlohmann::json objects are key-sorted, which fixes the field order.
    return json{{"backend_id", req.backend_id},
                {"kind", to_string(req.kind)},
                {"prompt", req.prompt},
                {"media", std::move(media)},
                {"params", std::move(params)}};
}

std::string cache_key(const BackendRequest& req) { return sha256_hex(canonical_request(req).dump()); }

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
}

std::optional<CacheEntry> ResponseCache::get(const std::string& key) const {
    {
        std::shared_lock lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    if (!dir_) return std::nullopt;

    const auto path = *dir_ / (key + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("key", std::string{}) != key) {
        return std::nullopt;
    }
    CacheEntry entry{key, j.at("value").get<std::string>(), j.value("created_at", std::int64_t{0})};
    std::unique_lock lock(mutex_);
    return entries_.emplace(key, std::move(entry)).first->second;
}

void ResponseCache::put(const std::string& key, const std::string& value) {
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    CacheEntry entry{key, value, now};

    std::unique_lock lock(mutex_);
    if (entries_.contains(key)) return;  // append-only: first writer wins
    if (dir_) {
        const auto final_path = *dir_ / (key + ".json");
        if (!std::filesystem::exists(final_path)) {
            std::ostringstream tmp_name;
            tmp_name << key << ".tmp." << std::this_thread::get_id();
            const auto tmp_path = *dir_ / tmp_name.str();
            {
                std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
                out << json{{"key", key}, {"value", value}, {"created_at", now}}.dump();
                if (!out) {
                    throw Error(ErrorCode::BackendError, "cannot write cache entry " + tmp_path.string());
                }
            }
            std::filesystem::rename(tmp_path, final_path);
        }
    }
    entries_.emplace(key, std::move(entry));
}

std::size_t ResponseCache::size() const {
    if (dir_) {
        std::size_t n = 0;
        for (const auto& e : std::filesystem::directory_iterator(*dir_)) {
            if (e.path().extension() == ".json") ++n;
        }
        return n;
    }
    std::shared_lock lock(mutex_);
    return entries_.size();
}

}  // namespace intentsketch::backends
