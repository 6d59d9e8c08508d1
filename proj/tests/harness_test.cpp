#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "intentsketch/harness.hpp"
#include "support.hpp"

using namespace intentsketch;
using namespace intentsketch::harness;
using testing_support::MockEnv;
using testing_support::TempDir;
namespace ib = intentsketch::backends;

namespace {

std::size_t error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_dataset(in);
    } catch (const Error& e) {
        return e.line().value_or(0);
    }
    ADD_FAILURE() << "expected an error";
    return 0;
}

const char* kLine1 = R"({"id":"a","query":"q1","options":[{"label":"A","text":"x"},{"label":"B","text":"y"}],"gold":"A"})";
const char* kLine2 = R"({"id":"b","query":"q2","options":[{"label":"A","text":"x"},{"label":"B","text":"y"}],"gold":"B"})";
const char* kLine3 = R"({"id":"c","query":"q3","gold":"a door"})";

struct MatrixFixture {
    MockEnv env;
    MatrixSpec spec;
    std::vector<OmniInput> items;
    pipeline::RunConfig base;

    MatrixFixture() {
        for (const char* id : {"perceiver", "lm1", "lm2", "engine"}) env.add(id);
        env.rule("You are an intent perceiver", {ib::MockReply::ok("the asker wants the cause")});
        env.responder("You are a policy provider", [](const ib::MockCall& c) {
            if (c.prompt.find("EXPLODE") != std::string::npos && c.prompt.find("Intent summary:") == std::string::npos &&
                c.backend_id == "lm2") {
                return ib::MockReply::ok("The answer is A.");
            }
            return ib::MockReply::ok("Plan " + std::to_string(c.seed.value_or(0)) + ": listen, then look.");
        });
        env.rule("You are a strategy evaluator", {testing_support::weights_reply({0.6, 0.2, 0.1, 0.1})});
        env.rule("Reason step by step", {ib::MockReply::ok("ANSWER: A")});

        spec.title = "t";
        spec.dataset = "items.jsonl";  // items are passed directly; the path is only validated for presence
        spec.pipeline_lms = {"lm1", "lm2"};
        spec.engines = {"engine"};
        spec.ablations = {"CG", "Abl_NI"};
        spec.intent_perceiver = "perceiver";
        for (int k = 0; k < 10; ++k) {
            auto x = testing_support::mc_item("item-" + std::to_string(k), k % 2 == 0 ? "A" : "B");
            if (k == 3) x.query += " EXPLODE";
            items.push_back(x);
        }
        base.objective_driven = false;
        base.oversample_factor = 1;
        base.seed = 3;
    }
};

}  // namespace

TEST(Dataset, ParsesLines) {
    std::istringstream in(std::string(kLine1) + "\n\n" + kLine2 + "\n" + kLine3 + "\n");
    const auto items = parse_dataset(in);
    ASSERT_EQ(items.size(), 3u);
    EXPECT_EQ(items[1].gold.value_or(""), "B");
    EXPECT_FALSE(items[2].is_multiple_choice());
}

TEST(Dataset, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line(std::string(kLine1) + "\n{not json\n" + kLine3 + "\n"), 2u);
    EXPECT_EQ(error_line(std::string(kLine1) + "\n" + kLine1 + "\n"), 2u);  // duplicate id
    EXPECT_EQ(error_line(std::string(kLine1) + "\n" + kLine2 + "\n" + R"({"id":"d","query":""})" + "\n"), 3u);
}

TEST(Dataset, EmptyFileIsEmptyAndMissingFileIsConfigError) {
    std::istringstream in("");
    EXPECT_TRUE(parse_dataset(in).empty());
    try {
        load_dataset("/nonexistent/items.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
    EXPECT_EQ(load_dataset(std::filesystem::path(INTENTSKETCH_DATA_DIR) / "items.jsonl").size(), 5u);
}

TEST(Accuracy, HalfUpHundredths) {
    auto recs = [](std::vector<bool> v) {
        std::vector<EvalRecord> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) r[i].correct = v[i];
        return r;
    };
    EXPECT_EQ(accuracy(recs({true, true, false, true})).str(), "75.00");
    EXPECT_EQ(accuracy(recs({true, true})).str(), "100.00");
    std::vector<bool> v(1199, false);
    for (std::size_t i = 0; i < 831; ++i) v[i] = true;
    EXPECT_EQ(accuracy(recs(v)).str(), "69.31");  // 69.3077...
    EXPECT_THROW(accuracy(std::vector<EvalRecord>{}), Error);
}

TEST(EvalRecord, JsonRoundTripOmitsEmptyError) {
    EvalRecord r{"i", "CG", "lm", "e", "A", "A", true, {0.5}, 12, false, ""};
    const auto j = nlohmann::json(r);
    EXPECT_FALSE(j.contains("error"));
    EXPECT_EQ(j.get<EvalRecord>(), r);
}

TEST(MatrixSpec, ValidationAndCells) {
    MatrixFixture f;
    EXPECT_NO_THROW(validate(f.spec));
    auto spec = f.spec;
    spec.ablations.push_back("BaseLine");
    const auto cells = matrix_cells(spec);
    ASSERT_EQ(cells.size(), 5u);  // 2 LMs x 2 experiments + one baseline
    EXPECT_EQ(cells.back().experiment, "BaseLine");
    EXPECT_EQ(cells.back().pipeline_lm, "");

    const auto cfg = cell_config(spec, cells.front(), f.base);
    EXPECT_EQ(cfg.roles.policy_generator, cells.front().pipeline_lm);
    EXPECT_EQ(cfg.roles.strategy_selector, cells.front().pipeline_lm);
    EXPECT_EQ(cfg.roles.reasoning_engine, "engine");
    EXPECT_EQ(cfg.roles.intent_perceiver, "perceiver");

    spec.ablations.push_back("Abl_ZZ");
    EXPECT_THROW(validate(spec), Error);
    spec = f.spec;
    spec.pipeline_lms.push_back("lm1");
    EXPECT_THROW(validate(spec), Error);
}

TEST(MatrixSpec, PerExperimentPerceivers) {
    MatrixFixture f;
    f.spec.ablations = {"CG_Qwen", "CG_GLM"};
    f.spec.intent_perceivers = {{"CG_Qwen", "qwen-vl"}, {"CG_GLM", "glm-v"}};
    const auto qwen = cell_config(f.spec, {"engine", "lm1", "CG_Qwen"}, f.base);
    const auto glm = cell_config(f.spec, {"engine", "lm1", "CG_GLM"}, f.base);
    EXPECT_EQ(qwen.roles.intent_perceiver, "qwen-vl");
    EXPECT_EQ(glm.roles.intent_perceiver, "glm-v");
    EXPECT_EQ(qwen.ablation, pipeline::AblationId::CG);
}

TEST(Matrix, ProductCountAndErrorContainment) {
    MatrixFixture f;
    const auto result = run_matrix(f.spec, f.items, f.base, f.env.registry);
    ASSERT_EQ(result.records.size(), 40u);
    std::size_t flagged = 0;
    for (const auto& r : result.records) {
        if (r.flagged) {
            ++flagged;
            EXPECT_EQ(r.item_id, "item-3");
            EXPECT_EQ(r.pipeline_lm, "lm2");
            EXPECT_EQ(r.ablation, "Abl_NI");
            EXPECT_FALSE(r.correct);
            EXPECT_FALSE(r.error.empty());
        }
    }
    EXPECT_EQ(flagged, 1u);
    EXPECT_EQ(result.cells.size(), 4u);
    EXPECT_EQ(result.cells.at({"engine", "lm1", "CG"}).str(), "50.00");
    EXPECT_EQ(result.cells.at({"engine", "lm2", "Abl_NI"}).str(), "50.00");  // item-3 has gold B
}

TEST(Matrix, ResumeMakesNoBackendCalls) {
    MatrixFixture f;
    TempDir dir("state");
    MatrixOptions opt;
    opt.state_dir = dir.path;
    const auto first = run_matrix(f.spec, f.items, f.base, f.env.registry, PromptBundle::defaults(), opt);
    EXPECT_EQ(first.cells_run, 4u);
    const auto before = f.env.registry.total_transport_calls();
    const auto second = run_matrix(f.spec, f.items, f.base, f.env.registry, PromptBundle::defaults(), opt);
    EXPECT_EQ(second.cells_resumed, 4u);
    EXPECT_EQ(second.cells_run, 0u);
    EXPECT_EQ(f.env.registry.total_transport_calls(), before);
    EXPECT_EQ(records_jsonl(first.records), records_jsonl(second.records));
}

TEST(Matrix, ConcurrencyDoesNotChangeRecords) {
    MatrixFixture a, b;
    MatrixOptions serial, wide;
    serial.concurrency = 1;
    wide.concurrency = 8;
    const auto ra = run_matrix(a.spec, a.items, a.base, a.env.registry, PromptBundle::defaults(), serial);
    const auto rb = run_matrix(b.spec, b.items, b.base, b.env.registry, PromptBundle::defaults(), wide);
    EXPECT_EQ(records_jsonl(ra.records), records_jsonl(rb.records));
}

TEST(Matrix, RejectsItemsWithoutGoldAndUnknownBackends) {
    MatrixFixture f;
    auto items = f.items;
    items[0].gold.reset();
    EXPECT_THROW(run_matrix(f.spec, items, f.base, f.env.registry), Error);
    f.spec.engines = {"ghost"};
    try {
        run_matrix(f.spec, f.items, f.base, f.env.registry);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
}

TEST(Matrix, ReportUsesBaselineCells) {
    MatrixFixture f;
    f.spec.ablations.push_back("BaseLine");
    const auto result = run_matrix(f.spec, f.items, f.base, f.env.registry);
    const auto table = to_report(f.spec, result);
    EXPECT_EQ(table.baselines.at("engine").str(), "50.00");
    const auto md = render_markdown(table);
    EXPECT_NE(md.find("| lm1 | engine (50.00) |"), std::string::npos) << md;
}

TEST(AtomicWrite, ReplacesContent) {
    TempDir dir("atomic");
    const auto p = dir.path / "out.txt";
    write_file_atomic(p, "one");
    write_file_atomic(p, "two");
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    EXPECT_EQ(s, "two");
    EXPECT_FALSE(std::filesystem::exists(dir.path / "out.txt.tmp"));
}
