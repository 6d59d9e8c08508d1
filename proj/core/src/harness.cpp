#include "intentsketch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace intentsketch::harness {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Datasets

std::vector<OmniInput> parse_dataset(std::istream& in) {
    std::vector<OmniInput> items;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(ErrorCode::ParseError, "line is not a JSON object", line_no);
        }
        OmniInput item;
        try {
            item = j.get<OmniInput>();
            validate_input(item);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ValidationError, e.what(), line_no);
        } catch (const Error& e) {
            throw Error(ErrorCode::ValidationError, std::string(to_string(e.code())) + ": " + e.detail(), line_no);
        }
        if (item.id.empty()) throw Error(ErrorCode::ValidationError, "item has no id", line_no);
        if (!ids.insert(item.id).second) {
            throw Error(ErrorCode::ValidationError, "duplicate item id " + item.id, line_no);
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<OmniInput> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open dataset " + path.string());
    return parse_dataset(in);
}

// ---------------------------------------------------------------------------
// Records

void to_json(json& j, const EvalRecord& r) {
    j = json{{"item_id", r.item_id},   {"ablation", r.ablation}, {"pipeline_lm", r.pipeline_lm},
             {"engine", r.engine},     {"predicted", r.predicted}, {"gold", r.gold},
             {"correct", r.correct},   {"entropies", r.entropies}, {"latency_ms", r.latency_ms},
             {"flagged", r.flagged}};
    if (!r.error.empty()) j["error"] = r.error;
}

void from_json(const json& j, EvalRecord& r) {
    j.at("item_id").get_to(r.item_id);
    j.at("ablation").get_to(r.ablation);
    r.pipeline_lm = j.value("pipeline_lm", std::string{});
    j.at("engine").get_to(r.engine);
    r.predicted = j.value("predicted", std::string{});
    r.gold = j.value("gold", std::string{});
    j.at("correct").get_to(r.correct);
    r.entropies = j.value("entropies", std::vector<double>{});
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.flagged = j.value("flagged", false);
    r.error = j.value("error", std::string{});
}

Percent accuracy(std::span<const EvalRecord> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyRecords, "accuracy of zero records");
    const auto correct = std::count_if(records.begin(), records.end(), [](const EvalRecord& r) { return r.correct; });
    return Percent::ratio(correct, static_cast<std::int64_t>(records.size()));
}

std::string records_jsonl(std::span<const EvalRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += json(r).dump();
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error(ErrorCode::ConfigError, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Matrix spec

void validate(const MatrixSpec& spec) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, "matrix spec: " + msg); };
    auto unique = [&fail](const std::vector<std::string>& v, const char* what) {
        if (v.empty()) fail(std::string(what) + " is empty");
        std::set<std::string> seen;
        for (const auto& s : v) {
            if (s.empty()) fail(std::string(what) + " has an empty entry");
            if (!seen.insert(s).second) fail(std::string(what) + " repeats " + s);
        }
    };
    unique(spec.engines, "engines");
    unique(spec.ablations, "ablations");
    const bool needs_lms = std::any_of(spec.ablations.begin(), spec.ablations.end(),
                                       [](const std::string& a) { return a != "BaseLine"; });
    if (needs_lms) unique(spec.pipeline_lms, "pipeline_lms");
    for (const auto& a : spec.ablations) pipeline::ablation_from_string(a);
    if (spec.dataset.empty()) fail("no dataset");
}

void from_json(const json& j, MatrixSpec& spec) {
    try {
        spec.title = j.value("title", std::string{});
        spec.pipeline_lms = j.value("pipeline_lms", std::vector<std::string>{});
        spec.engines = j.value("engines", std::vector<std::string>{});
        spec.ablations = j.value("ablations", std::vector<std::string>{});
        spec.intent_perceivers = j.value("intent_perceivers", std::map<std::string, std::string>{});
        spec.intent_perceiver = j.value("intent_perceiver", std::string{});
        spec.dataset = j.value("dataset", std::string{});
        spec.baselines.clear();
        if (auto b = j.find("baselines"); b != j.end()) {
            for (auto it = b->begin(); it != b->end(); ++it) {
                spec.baselines[it.key()] =
                    it->is_string() ? Percent::parse(it->get<std::string>()) : Percent::parse(it->dump());
            }
        }
        spec.run = j.value("run", json::object());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("matrix spec: ") + e.what());
    }
}

MatrixSpec load_matrix_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open matrix spec " + path.string());
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::ParseError, "matrix spec is not a JSON object: " + path.string());
    }
    MatrixSpec spec = j.get<MatrixSpec>();
    if (!spec.dataset.empty() && spec.dataset.is_relative()) spec.dataset = path.parent_path() / spec.dataset;
    validate(spec);
    return spec;
}

std::vector<CellKey> matrix_cells(const MatrixSpec& spec) {
    std::vector<CellKey> cells;
    for (const auto& engine : spec.engines) {
        for (const auto& a : spec.ablations) {
            if (a == "BaseLine") {
                cells.push_back(CellKey{engine, "", a});
                continue;
            }
            for (const auto& lm : spec.pipeline_lms) cells.push_back(CellKey{engine, lm, a});
        }
    }
    return cells;
}

pipeline::RunConfig cell_config(const MatrixSpec& spec, const CellKey& cell, const pipeline::RunConfig& base) {
    pipeline::RunConfig cfg = base;
    cfg.ablation = pipeline::ablation_from_string(cell.experiment);
    cfg.roles.reasoning_engine = cell.engine;
    cfg.roles.policy_generator = cell.pipeline_lm;
    cfg.roles.strategy_selector = cell.pipeline_lm;
    if (auto it = spec.intent_perceivers.find(cell.experiment); it != spec.intent_perceivers.end()) {
        cfg.roles.intent_perceiver = it->second;
    } else if (!spec.intent_perceiver.empty()) {
        cfg.roles.intent_perceiver = spec.intent_perceiver;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string file_safe(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    return out.empty() ? std::string("none") : out;
}

std::filesystem::path cell_file(const std::filesystem::path& dir, const CellKey& cell) {
    return dir / "cells" / (file_safe(cell.engine) + "__" + file_safe(cell.pipeline_lm) + "__" +
                            file_safe(cell.experiment) + ".jsonl");
}

// Records from an earlier run of this cell, when they cover exactly `items`.
std::optional<std::vector<EvalRecord>> load_cell(const std::filesystem::path& path, const CellKey& cell,
                                                 const std::vector<OmniInput>& items) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::vector<EvalRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        try {
            records.push_back(j.get<EvalRecord>());
        } catch (const json::exception&) {
            return std::nullopt;
        }
    }
    if (records.size() != items.size()) return std::nullopt;
    std::set<std::string> want;
    for (const auto& x : items) want.insert(x.id);
    for (const auto& r : records) {
        if (r.engine != cell.engine || r.pipeline_lm != cell.pipeline_lm || r.ablation != cell.experiment ||
            want.erase(r.item_id) != 1) {
            return std::nullopt;
        }
    }
    return records;
}

EvalRecord evaluate_item(const pipeline::Pipeline& p, const OmniInput& x, const CellKey& cell,
                         const pipeline::RunConfig& cfg) {
    EvalRecord r;
    r.item_id = x.id;
    r.ablation = cell.experiment;
    r.pipeline_lm = cell.pipeline_lm;
    r.engine = cell.engine;
    r.gold = x.gold.value_or("");
    try {
        const auto outcome = p.run(x, cfg);
        r.predicted = outcome.answer;
        r.entropies = outcome.per_candidate_entropies;
        r.latency_ms = outcome.latency_ms;
    } catch (const Error& e) {
        r.flagged = true;
        r.error = e.what();
    }
    r.correct = !r.flagged && r.predicted == r.gold;
    return r;
}

}  // namespace

MatrixResult run_matrix(const MatrixSpec& spec, const std::vector<OmniInput>& items, const pipeline::RunConfig& base,
                        const backends::BackendRegistry& registry, const PromptBundle& prompts,
                        const MatrixOptions& options) {
    validate(spec);
    if (items.empty()) throw Error(ErrorCode::EmptyRecords, "dataset has no items");
    for (const auto& x : items) {
        if (!x.gold) throw Error(ErrorCode::ValidationError, "item " + x.id + " has no gold answer");
    }
    const auto cells = matrix_cells(spec);
    for (const auto& cell : cells) {
        pipeline::validate(cell_config(spec, cell, base));
        for (const auto* role : {&cell.engine, &cell.pipeline_lm}) {
            if (!role->empty() && !registry.contains(*role)) {
                throw Error(ErrorCode::ConfigError, "no backend configured for " + *role);
            }
        }
    }

    pipeline::Pipeline pipe(registry, prompts, options.run_log);
    MatrixResult result;
    for (const auto& cell : cells) {
        const auto path = options.state_dir ? std::optional(cell_file(*options.state_dir, cell)) : std::nullopt;
        std::vector<EvalRecord> records;
        bool resumed = false;
        if (path) {
            if (auto done = load_cell(*path, cell, items)) {
                records = std::move(*done);
                resumed = true;
            }
        }

        if (!resumed) {
            const auto cfg = cell_config(spec, cell, base);
            records.resize(items.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i; (i = next.fetch_add(1)) < items.size();) {
                    records[i] = evaluate_item(pipe, items[i], cell, cfg);
                }
            };
            const auto n_workers =
                std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.concurrency)), items.size());
            std::vector<std::thread> workers;
            for (std::size_t w = 1; w < n_workers; ++w) workers.emplace_back(worker);
            worker();
            for (auto& t : workers) t.join();
        }

        std::sort(records.begin(), records.end(),
                  [](const EvalRecord& a, const EvalRecord& b) { return a.item_id < b.item_id; });
        if (path && !resumed) write_file_atomic(*path, records_jsonl(records));

        result.cells[cell] = accuracy(records);
        resumed ? ++result.cells_resumed : ++result.cells_run;
        if (options.on_cell) options.on_cell(cell, resumed);
        result.records.insert(result.records.end(), records.begin(), records.end());
    }
    return result;
}

ReportTable to_report(const MatrixSpec& spec, const MatrixResult& result) {
    ReportTable t;
    t.title = spec.title;
    t.engines = spec.engines;
    t.pipeline_lms = spec.pipeline_lms;
    t.columns = spec.ablations;
    t.baselines = spec.baselines;
    for (const auto& [cell, acc] : result.cells) {
        if (cell.experiment == "BaseLine") {
            t.baselines[cell.engine] = acc;
        } else {
            t.cells[cell] = acc;
        }
    }
    return t;
}

}  // namespace intentsketch::harness
