#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentsketch/backends.hpp"
#include "intentsketch/pipeline.hpp"
#include "intentsketch/report.hpp"
#include "intentsketch/templates.hpp"
#include "intentsketch/types.hpp"

namespace intentsketch::harness {

/// JSONL, one OmniInput per line. Blank lines are skipped; an empty file is
/// an empty dataset. Error{ParseError | ValidationError} carry the line.
std::vector<OmniInput> parse_dataset(std::istream& in);
std::vector<OmniInput> load_dataset(const std::filesystem::path& path);

struct EvalRecord {
    std::string item_id;
    std::string ablation;  // experiment id, e.g. CG_Qwen
    std::string pipeline_lm;
    std::string engine;
    std::string predicted;
    std::string gold;
    bool correct = false;
    std::vector<double> entropies;
    std::int64_t latency_ms = 0;
    bool flagged = false;  // the item errored and is scored incorrect
    std::string error;

    bool operator==(const EvalRecord&) const = default;
};

void to_json(nlohmann::json& j, const EvalRecord& r);
void from_json(const nlohmann::json& j, EvalRecord& r);

/// 100 * correct / total, half-up to two decimals. Error{EmptyRecords}.
Percent accuracy(std::span<const EvalRecord> records);

/// The experiment grid. Experiment ids are Abl_NI, Abl_SP, BaseLine, CG, or
/// CG_<label>; `intent_perceivers` binds an id to its perceiver backend and
/// `intent_perceiver` is the fallback.
struct MatrixSpec {
    std::string title;
    std::vector<std::string> pipeline_lms;
    std::vector<std::string> engines;
    std::vector<std::string> ablations;
    std::map<std::string, std::string> intent_perceivers;
    std::string intent_perceiver;
    std::filesystem::path dataset;
    std::map<std::string, Percent> baselines;  // used when BaseLine is not run
    nlohmann::json run = nlohmann::json::object();  // RunConfig overrides
};

/// Error{ConfigError} on empty lists, duplicates or unknown experiment ids.
void validate(const MatrixSpec& spec);

/// Relative dataset paths resolve against the spec file's directory.
MatrixSpec load_matrix_spec(const std::filesystem::path& path);
void from_json(const nlohmann::json& j, MatrixSpec& spec);

/// Cells in evaluation order. BaseLine ignores the pipeline LM, so it is one
/// cell per engine with an empty pipeline_lm.
std::vector<CellKey> matrix_cells(const MatrixSpec& spec);

/// Run configuration for one cell: the pipeline LM generates and selects,
/// the engine reasons, and the experiment id picks the ablation and perceiver.
pipeline::RunConfig cell_config(const MatrixSpec& spec, const CellKey& cell, const pipeline::RunConfig& base);

struct MatrixOptions {
    std::optional<std::filesystem::path> state_dir;  // per-cell record files for resume
    int concurrency = 4;
    pipeline::RunLog* run_log = nullptr;
    std::function<void(const CellKey&, bool resumed)> on_cell;
};

struct MatrixResult {
    std::vector<EvalRecord> records;  // by cell order, then item id
    std::map<CellKey, Percent> cells;
    std::size_t cells_run = 0;
    std::size_t cells_resumed = 0;
};

/// Every (cell, item) pair is evaluated once. Item failures are recorded as
/// flagged, incorrect records and do not stop the matrix.
MatrixResult run_matrix(const MatrixSpec& spec, const std::vector<OmniInput>& items,
                        const pipeline::RunConfig& base, const backends::BackendRegistry& registry,
                        const PromptBundle& prompts = PromptBundle::defaults(), const MatrixOptions& options = {});

/// Report table for a finished matrix. Baselines come from BaseLine cells,
/// falling back to the spec's published baselines.
ReportTable to_report(const MatrixSpec& spec, const MatrixResult& result);

/// One compact JSON object per line.
std::string records_jsonl(std::span<const EvalRecord> records);

/// Writes `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace intentsketch::harness
