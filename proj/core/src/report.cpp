#include "intentsketch/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "intentsketch/error.hpp"

namespace intentsketch::harness {

namespace {

// Rounds num/den to the nearest integer, halves away from zero.
std::int64_t round_half_up(std::int64_t num, std::int64_t den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t mag = (2 * (num < 0 ? -num : num) + den) / (2 * den);
    return num < 0 ? -mag : mag;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Percent Percent::parse(std::string_view text) {
    const std::string s = trim(text);
    auto bad = [&s] { return Error(ErrorCode::ParseError, "not a percentage: '" + s + "'"); };
    if (s.empty()) throw bad();

    std::size_t pos = 0;
    bool negative = false;
    if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
    const auto dot = s.find('.', pos);
    const std::string whole = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    std::string frac = dot == std::string::npos ? std::string{} : s.substr(dot + 1);
    if (whole.empty() || frac.size() > 2 || (dot != std::string::npos && frac.empty())) throw bad();
    auto digits = [](const std::string& d) { return std::all_of(d.begin(), d.end(), ::isdigit); };
    if (!digits(whole) || !digits(frac)) throw bad();
    while (frac.size() < 2) frac.push_back('0');

    std::int64_t w = 0;
    std::int64_t f = 0;
    std::from_chars(whole.data(), whole.data() + whole.size(), w);
    std::from_chars(frac.data(), frac.data() + frac.size(), f);
    const std::int64_t h = w * 100 + f;
    return Percent{negative ? -h : h};
}

Percent Percent::ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error(ErrorCode::EmptyRecords, "percentage of an empty total");
    return Percent{round_half_up(num * 10000, den)};
}

std::string Percent::str() const {
    const std::int64_t mag = hundredths < 0 ? -hundredths : hundredths;
    std::string frac = std::to_string(mag % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::string(hundredths < 0 ? "-" : "") + std::to_string(mag / 100) + "." + frac;
}

std::string format_delta(Percent acc, Percent base) {
    const Percent d{acc.hundredths - base.hundredths};
    return (d.hundredths < 0 ? "" : "+") + d.str() + " pp";
}

Percent relative_improvement(Percent acc, Percent base) {
    if (base.hundredths == 0) throw Error(ErrorCode::MissingBaseline, "relative improvement over a zero baseline");
    // (acc - base) / base, in hundredths of a percent.
    return Percent{round_half_up((acc.hundredths - base.hundredths) * 10000, base.hundredths)};
}

void normalize_columns(ReportTable& t) {
    std::vector<std::string> cols(std::begin(kStandardColumns), std::end(kStandardColumns));
    for (const auto& c : t.columns) {
        if (c != "BaseLine" && std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
    for (const auto& [key, _] : t.cells) {
        if (key.experiment != "BaseLine" && std::find(cols.begin(), cols.end(), key.experiment) == cols.end()) {
            cols.push_back(key.experiment);
        }
    }
    t.columns = std::move(cols);

    // Rows named by cells but absent from the declared order go last, sorted.
    for (const auto& [key, _] : t.cells) {
        if (key.experiment == "BaseLine") continue;
        if (std::find(t.engines.begin(), t.engines.end(), key.engine) == t.engines.end()) {
            t.engines.push_back(key.engine);
        }
        if (std::find(t.pipeline_lms.begin(), t.pipeline_lms.end(), key.pipeline_lm) == t.pipeline_lms.end()) {
            t.pipeline_lms.push_back(key.pipeline_lm);
        }
    }
}

namespace {

void check_renderable(const ReportTable& t) {
    bool any = false;
    for (const auto& [key, _] : t.cells) {
        if (key.experiment == "BaseLine") continue;
        any = true;
        if (!t.baselines.contains(key.engine)) {
            throw Error(ErrorCode::MissingBaseline, "no baseline accuracy for engine " + key.engine);
        }
    }
    if (!any) throw Error(ErrorCode::EmptyRecords, "report has no cells");
}

bool engine_has_row(const ReportTable& t, const std::string& engine, const std::string& lm) {
    for (const auto& col : t.columns) {
        if (t.cells.contains(CellKey{engine, lm, col})) return true;
    }
    return false;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::vector<BestCell> best_cells(ReportTable t) {
    normalize_columns(t);
    check_renderable(t);
    std::vector<BestCell> out;
    for (const auto& engine : t.engines) {
        auto base = t.baselines.find(engine);
        if (base == t.baselines.end()) continue;
        std::optional<BestCell> best;
        for (const auto& col : t.columns) {
            for (const auto& lm : t.pipeline_lms) {
                auto it = t.cells.find(CellKey{engine, lm, col});
                if (it == t.cells.end()) continue;
                const Percent gain{it->second.hundredths - base->second.hundredths};
                if (!best || gain > best->gain) {
                    best = BestCell{it->first, it->second, gain, relative_improvement(it->second, base->second)};
                }
            }
        }
        if (best) out.push_back(*best);
    }
    return out;
}

std::string render_markdown(ReportTable t) {
    normalize_columns(t);
    check_renderable(t);

    std::ostringstream md;
    if (!t.title.empty()) md << "## " << t.title << "\n\n";
    md << "| Pipeline | Reasoning model (baseline) |";
    for (const auto& c : t.columns) md << ' ' << c << " |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < t.columns.size(); ++i) md << "---|";
    md << '\n';

    for (const auto& engine : t.engines) {
        const auto base = t.baselines.find(engine);
        bool first = true;
        for (const auto& lm : t.pipeline_lms) {
            if (!engine_has_row(t, engine, lm)) continue;
            md << "| " << lm << " | ";
            if (first && base != t.baselines.end()) md << engine << " (" << base->second.str() << ")";
            md << " |";
            first = false;
            for (const auto& col : t.columns) {
                auto it = t.cells.find(CellKey{engine, lm, col});
                if (it == t.cells.end()) {
                    md << " - |";
                } else {
                    md << ' ' << it->second.str() << " (" << format_delta(it->second, base->second) << ") |";
                }
            }
            md << '\n';
        }
    }

    const auto best = best_cells(t);
    if (!best.empty()) md << '\n';
    const BestCell* overall = nullptr;
    for (const auto& b : best) {
        md << "- " << b.key.engine << ": baseline " << t.baselines.at(b.key.engine).str() << ", maximum "
           << b.accuracy.str() << " (" << format_delta(b.accuracy, t.baselines.at(b.key.engine)) << "; "
           << b.key.experiment << "; Pipeline = " << b.key.pipeline_lm << "), " << b.relative.str()
           << "% relative improvement\n";
        if (overall == nullptr || b.gain > overall->gain) overall = &b;
    }
    if (overall != nullptr) {
        md << "\nMaximum gain: " << format_delta(overall->accuracy, t.baselines.at(overall->key.engine)) << " ("
           << overall->relative.str() << "% relative improvement)\n";
    }
    return md.str();
}

std::string render_csv(ReportTable t) {
    normalize_columns(t);
    check_renderable(t);

    std::ostringstream csv;
    csv << "engine,baseline,pipeline_lm";
    for (const auto& c : t.columns) csv << ',' << csv_field(c);
    csv << '\n';
    for (const auto& engine : t.engines) {
        const auto& base = t.baselines.at(engine);
        for (const auto& lm : t.pipeline_lms) {
            if (!engine_has_row(t, engine, lm)) continue;
            csv << csv_field(engine) << ',' << base.str() << ',' << csv_field(lm);
            for (const auto& col : t.columns) {
                auto it = t.cells.find(CellKey{engine, lm, col});
                csv << ',' << (it == t.cells.end() ? std::string{} : it->second.str());
            }
            csv << '\n';
        }
    }
    return csv.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote", line_no);
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

ReportTable parse_csv(std::string_view csv) {
    ReportTable t;
    std::istringstream in{std::string(csv)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line, line_no);
        if (header.empty()) {
            if (fields.size() < 3 || fields[0] != "engine" || fields[1] != "baseline" || fields[2] != "pipeline_lm") {
                throw Error(ErrorCode::ParseError, "expected header engine,baseline,pipeline_lm,...", line_no);
            }
            header = fields;
            t.columns.assign(header.begin() + 3, header.end());
            continue;
        }
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::ParseError,
                        "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                        line_no);
        }
        try {
            const std::string& engine = fields[0];
            const std::string& lm = fields[2];
            if (std::find(t.engines.begin(), t.engines.end(), engine) == t.engines.end()) t.engines.push_back(engine);
            if (std::find(t.pipeline_lms.begin(), t.pipeline_lms.end(), lm) == t.pipeline_lms.end()) {
                t.pipeline_lms.push_back(lm);
            }
            t.baselines[engine] = Percent::parse(fields[1]);
            for (std::size_t i = 3; i < fields.size(); ++i) {
                if (fields[i].empty()) continue;
                t.cells[CellKey{engine, lm, header[i]}] = Percent::parse(fields[i]);
            }
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, e.detail(), line_no);
        }
    }
    if (header.empty()) throw Error(ErrorCode::ParseError, "empty CSV", 1);
    return t;
}

namespace {

Percent percent_value(const nlohmann::json& v) {
    if (v.is_string()) return Percent::parse(v.get<std::string>());
    if (v.is_number()) return Percent::parse(v.dump());
    throw Error(ErrorCode::ParseError, "expected a percentage, got " + v.dump());
}

}  // namespace

ReportTable report_table_from_json(const nlohmann::json& j) {
    static const std::set<std::string> row_keys{"engine", "pipeline_lm"};
    ReportTable t;
    try {
        t.title = j.value("title", std::string{});
        t.engines = j.value("engines", std::vector<std::string>{});
        t.pipeline_lms = j.value("pipeline_lms", std::vector<std::string>{});
        t.columns = j.value("columns", std::vector<std::string>{});
        const auto baselines = j.value("baselines", nlohmann::json::object());
        for (const auto& [engine, v] : baselines.items()) {
            t.baselines[engine] = percent_value(v);
        }
        for (const auto& row : j.value("rows", nlohmann::json::array())) {
            const auto engine = row.at("engine").get<std::string>();
            const auto lm = row.at("pipeline_lm").get<std::string>();
            for (const auto& [key, v] : row.items()) {
                if (!row_keys.contains(key)) t.cells[CellKey{engine, lm, key}] = percent_value(v);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("report table: ") + e.what());
    }
    return t;
}

std::vector<ReportTable> load_report_tables(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "not JSON: " + path.string());
    std::vector<ReportTable> out;
    if (j.contains("tables")) {
        for (const auto& t : j.at("tables")) out.push_back(report_table_from_json(t));
    } else {
        out.push_back(report_table_from_json(j));
    }
    return out;
}

}  // namespace intentsketch::harness
