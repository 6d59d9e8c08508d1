#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

namespace intentsketch::harness {

/// A percentage held as integer hundredths so that rendering and parsing are
/// exact: 71.18 is {7118}.
struct Percent {
    std::int64_t hundredths = 0;

    /// "71.18", "70.9", "-0.36", "69"; more than two decimals is an error.
    static Percent parse(std::string_view text);
    /// 100 * num / den rounded half-up (away from zero) to two decimals.
    static Percent ratio(std::int64_t num, std::int64_t den);

    double value() const noexcept { return static_cast<double>(hundredths) / 100.0; }
    std::string str() const;  // always two decimals

    auto operator<=>(const Percent&) const = default;
};

/// "+1.85 pp", "-0.36 pp", "+0.00 pp".
std::string format_delta(Percent acc, Percent base);

/// 100 * (acc - base) / base as a percentage, half-up to two decimals.
Percent relative_improvement(Percent acc, Percent base);

struct CellKey {
    std::string engine;
    std::string pipeline_lm;
    std::string experiment;

    auto operator<=>(const CellKey&) const = default;
};

/// One results table: rows are pipeline LMs grouped under each engine,
/// columns are experiment ids.
struct ReportTable {
    std::string title;
    std::vector<std::string> engines;       // row group order
    std::vector<std::string> pipeline_lms;  // row order within a group
    std::vector<std::string> columns;       // filled by normalize_columns()
    std::map<CellKey, Percent> cells;
    std::map<std::string, Percent> baselines;
};

inline constexpr std::string_view kStandardColumns[] = {"CG_Qwen", "CG_GLM", "Abl_NI", "Abl_SP"};

/// The four standard experiment ids first, then any other experiment that
/// has a cell, in first-seen order. BaseLine is never a column.
void normalize_columns(ReportTable& t);

/// Error{MissingBaseline} when an engine with cells has no baseline;
/// Error{EmptyRecords} when there are no cells.
std::string render_markdown(ReportTable t);
std::string render_csv(ReportTable t);

/// Inverse of render_csv. Error{ParseError} with the line number on bad input.
ReportTable parse_csv(std::string_view csv);

/// Best cell per engine: largest gain over baseline, ties to the earlier
/// column then the earlier pipeline LM.
struct BestCell {
    CellKey key;
    Percent accuracy;
    Percent gain;
    Percent relative;
};
std::vector<BestCell> best_cells(ReportTable t);

/// Table from JSON:
///   {"title", "engines", "pipeline_lms", "baselines": {engine: "69.33"},
///    "rows": [{"engine", "pipeline_lm", "<experiment>": "71.18", ...}]}
/// Values may be strings or numbers. Error{ParseError}.
ReportTable report_table_from_json(const nlohmann::json& j);

/// A single table object, or {"tables": [...]}.
std::vector<ReportTable> load_report_tables(const std::filesystem::path& path);

}  // namespace intentsketch::harness
