#include <algorithm>

#include <gtest/gtest.h>

#include "intentsketch/error.hpp"
#include "intentsketch/report.hpp"

using namespace intentsketch;
using namespace intentsketch::harness;

namespace {

std::vector<ReportTable> published() {
    return load_report_tables(std::filesystem::path(INTENTSKETCH_FIXTURE_DIR) / "published_tables.json");
}

const ReportTable& table(const std::vector<ReportTable>& ts, const std::string& title) {
    for (const auto& t : ts) {
        if (t.title == title) return t;
    }
    throw std::runtime_error("no table " + title);
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST(Percent, ParseAndFormat) {
    EXPECT_EQ(Percent::parse("71.18").hundredths, 7118);
    EXPECT_EQ(Percent::parse("48.8").str(), "48.80");
    EXPECT_EQ(Percent::parse("69").str(), "69.00");
    EXPECT_EQ(Percent::parse("-0.36").hundredths, -36);
    EXPECT_THROW(Percent::parse("1.234"), Error);
    EXPECT_THROW(Percent::parse("abc"), Error);
    EXPECT_THROW(Percent::parse(""), Error);
}

TEST(Percent, RatioRoundsHalfUp) {
    EXPECT_EQ(Percent::ratio(831, 1199).str(), "69.31");
    EXPECT_EQ(Percent::ratio(1, 8).str(), "12.50");
    EXPECT_EQ(Percent::ratio(1, 16).str(), "6.25");
    EXPECT_EQ(Percent::ratio(1, 32).str(), "3.13");  // 3.125 rounds up
    EXPECT_EQ(Percent::ratio(2, 3).str(), "66.67");
    EXPECT_THROW(Percent::ratio(1, 0), Error);
}

TEST(Delta, Formatting) {
    EXPECT_EQ(format_delta(Percent::parse("71.18"), Percent::parse("69.33")), "+1.85 pp");
    EXPECT_EQ(format_delta(Percent::parse("70.82"), Percent::parse("71.18")), "-0.36 pp");
    EXPECT_EQ(format_delta(Percent::parse("50"), Percent::parse("50")), "+0.00 pp");
    EXPECT_EQ(relative_improvement(Percent::parse("56.96"), Percent::parse("47.45")).str(), "20.04");
}

TEST(Report, SingleCellRendersOneRow) {
    ReportTable t;
    t.title = "Mini";
    t.engines = {"E"};
    t.pipeline_lms = {"L"};
    t.cells[{"E", "L", "CG_Qwen"}] = Percent::parse("50.5");
    t.baselines["E"] = Percent::parse("50");
    const auto md = render_markdown(t);
    EXPECT_TRUE(contains(md, "| L | E (50.00) | 50.50 (+0.50 pp) | - | - | - |")) << md;
    int rows = 0;
    for (std::size_t p = 0; (p = md.find("\n| L |", p)) != std::string::npos; ++p) ++rows;
    EXPECT_EQ(rows, 1);
}

TEST(Report, MissingBaselineAndEmptyTable) {
    ReportTable t;
    t.engines = {"E"};
    t.pipeline_lms = {"L"};
    try {
        render_markdown(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyRecords);
    }
    t.cells[{"E", "L", "CG"}] = Percent::parse("1");
    try {
        render_markdown(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingBaseline);
    }
}

TEST(Report, ColumnsStandardFirstBaselineNever) {
    ReportTable t;
    t.engines = {"E"};
    t.pipeline_lms = {"L"};
    t.baselines["E"] = Percent::parse("10");
    t.cells[{"E", "L", "CG_X"}] = Percent::parse("11");
    t.cells[{"E", "L", "Abl_SP"}] = Percent::parse("12");
    t.cells[{"E", "L", "BaseLine"}] = Percent::parse("10");
    normalize_columns(t);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"CG_Qwen", "CG_GLM", "Abl_NI", "Abl_SP", "CG_X"}));
}

TEST(Published, CellsAndDeltasFromTheTables) {
    const auto ts = published();
    ASSERT_EQ(ts.size(), 3u);
    const auto ib = render_markdown(table(ts, "IntentBench"));
    EXPECT_TRUE(contains(ib, "71.18 (+1.85 pp)")) << ib;
    const auto ws = render_markdown(table(ts, "WorldSense"));
    EXPECT_TRUE(contains(ws, "48.80 (+1.70 pp)")) << ws;
    const auto dd = render_markdown(table(ts, "Daily-Omni"));
    EXPECT_TRUE(contains(dd, "56.96 (+9.51 pp)")) << dd;
    EXPECT_TRUE(contains(dd, "Maximum gain: +9.51 pp (20.04% relative improvement)")) << dd;
}

TEST(Published, BestCellPerEngineMatchesNarrative) {
    struct Want {
        const char* title;
        const char* engine;
        const char* acc;
        const char* gain;
        const char* rel;
        const char* exp;
        const char* lm;
    };
    // Per-engine maxima as stated alongside the tables, with relative
    // improvements computed by hand from the two percentages.
    const Want want[] = {
        {"IntentBench", "HumanOmniV2", "71.18", "1.85", "2.67", "CG_Qwen", "Qwen3"},
        {"IntentBench", "Qwen2.5-Omni", "66.07", "1.87", "2.91", "CG_GLM", "GPT-4o"},
        {"IntentBench", "Qwen2.5-VL", "63.83", "2.15", "3.49", "CG_GLM", "Qwen3"},
        {"WorldSense", "HumanOmniV2", "48.80", "1.70", "3.61", "CG_Qwen", "GPT-4o"},
        {"WorldSense", "Qwen2.5-Omni", "47.86", "2.46", "5.42", "CG_Qwen", "Qwen3"},
        {"WorldSense", "Qwen2.5-VL", "43.41", "6.02", "16.10", "CG_Qwen", "GLM-4.5"},
        {"Daily-Omni", "HumanOmniV2", "62.74", "4.27", "7.30", "CG_Qwen", "GLM-4.5"},
        {"Daily-Omni", "Qwen2.5-Omni", "56.96", "9.51", "20.04", "CG_GLM", "Qwen3"},
        {"Daily-Omni", "Qwen2.5-VL", "51.71", "4.43", "9.37", "CG_GLM", "GLM-4.5"},
    };
    const auto ts = published();
    for (const auto& w : want) {
        const auto best = best_cells(table(ts, w.title));
        const auto it = std::find_if(best.begin(), best.end(), [&](const BestCell& b) { return b.key.engine == w.engine; });
        ASSERT_NE(it, best.end()) << w.title << " " << w.engine;
        EXPECT_EQ(it->accuracy.str(), w.acc) << w.title << " " << w.engine;
        EXPECT_EQ(it->gain.str(), w.gain) << w.title << " " << w.engine;
        EXPECT_EQ(it->relative.str(), w.rel) << w.title << " " << w.engine;
        EXPECT_EQ(it->key.experiment, w.exp) << w.title << " " << w.engine;
        EXPECT_EQ(it->key.pipeline_lm, w.lm) << w.title << " " << w.engine;
    }
}

TEST(Published, EveryFullPipelineCellBeatsItsBaseline) {
    for (const auto& t : published()) {
        for (const auto& [key, acc] : t.cells) {
            if (key.experiment.starts_with("CG")) {
                EXPECT_GT(acc, t.baselines.at(key.engine)) << t.title << " " << key.engine << " " << key.pipeline_lm;
            }
        }
    }
}

TEST(Published, RenderingIsByteStable) {
    const auto a = published();
    const auto b = published();
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(render_markdown(a[i]), render_markdown(b[i]));
        EXPECT_EQ(render_csv(a[i]), render_csv(b[i]));
    }
}

TEST(Csv, RoundTrip) {
    for (const auto& t : published()) {
        const auto csv = render_csv(t);
        const auto back = parse_csv(csv);
        EXPECT_EQ(render_csv(back), csv);
        EXPECT_EQ(back.cells, t.cells);
        EXPECT_EQ(back.baselines, t.baselines);
    }
    EXPECT_THROW(parse_csv("engine,baseline,pipeline_lm,CG_Qwen\nE,abc,L,1\n"), Error);
}

TEST(Csv, QuotesFieldsWithCommas) {
    ReportTable t;
    t.engines = {"E, large"};
    t.pipeline_lms = {"L"};
    t.baselines["E, large"] = Percent::parse("10");
    t.cells[{"E, large", "L", "CG_Qwen"}] = Percent::parse("11");
    const auto csv = render_csv(t);
    EXPECT_NE(csv.find("\"E, large\""), std::string::npos);
    EXPECT_EQ(parse_csv(csv).cells, t.cells);
}
