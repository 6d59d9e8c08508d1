#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "intentsketch/backends.hpp"
#include "intentsketch/harness.hpp"
#include "intentsketch/mock.hpp"
#include "intentsketch/pipeline.hpp"
#include "intentsketch/report.hpp"
#include "intentsketch/simlab.hpp"
#include "intentsketch/templates.hpp"

namespace intentsketch::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using harness::CellKey;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidTemplate:
        case ErrorCode::InvalidWeights:
        case ErrorCode::InvalidWorld:
        case ErrorCode::MissingBaseline:
        case ErrorCode::EmptyRecords:
            return kExitConfig;
        case ErrorCode::BackendError:
        case ErrorCode::TransportError:
        case ErrorCode::RateLimited:
        case ErrorCode::MalformedResponse:
        case ErrorCode::UnparseableVerdict:
            return kExitBackend;
        case ErrorCode::ParseError:
        case ErrorCode::ValidationError:
        case ErrorCode::EmptyQuery:
        case ErrorCode::DuplicateSlotLabel:
        case ErrorCode::GoldNotInOptions:
        case ErrorCode::TooFewOptions:
            return kExitParse;
        default:
            return kExitFailure;
    }
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "not valid JSON: " + path.string());
    return j;
}

// Options shared by run and eval.
struct BackendFlags {
    std::string backends;
    std::string mock_scenario;
    std::string cache_dir;
    std::string templates;
    std::string config;
    std::optional<std::int64_t> seed;
    int concurrency = 4;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
    cmd->add_option("--backends", f.backends, "Backend configuration JSON")->required();
    cmd->add_option("--mock-scenario", f.mock_scenario, "Serve every backend from a scripted mock scenario");
    cmd->add_option("--cache-dir", f.cache_dir, "Persistent response cache directory");
    cmd->add_option("--templates", f.templates, "Directory of prompt template overrides");
    cmd->add_option("--config", f.config, "Run configuration JSON");
    cmd->add_option("--seed", f.seed, "Run seed");
    cmd->add_option("--concurrency", f.concurrency, "Concurrent items and candidate evaluations")
        ->check(CLI::Range(1, 256));
}

backends::BackendRegistry build_registry(const BackendFlags& f, const std::optional<fs::path>& default_cache) {
    const auto configs = backends::load_backend_configs(f.backends);
    std::shared_ptr<const backends::MockScript> script;
    if (!f.mock_scenario.empty()) {
        script = std::make_shared<const backends::MockScript>(backends::MockScript::load(f.mock_scenario));
    }
    std::shared_ptr<backends::ResponseCache> cache;
    if (!f.cache_dir.empty()) {
        cache = std::make_shared<backends::ResponseCache>(fs::path(f.cache_dir));
    } else if (default_cache) {
        cache = std::make_shared<backends::ResponseCache>(*default_cache);
    } else {
        cache = std::make_shared<backends::ResponseCache>();
    }

    backends::BackendRegistry registry;
    for (const auto& cfg : configs) {
        std::shared_ptr<backends::Transport> transport;
        if (script) {
            transport = std::make_shared<backends::MockTransport>(script, cfg.backend_id);
        } else {
            transport = std::make_shared<backends::HttpTransport>(cfg.base_url, cfg.api_key_env_var);
        }
        registry.add(std::make_shared<backends::Backend>(cfg, transport, cache));
    }
    return registry;
}

PromptBundle load_prompts(const BackendFlags& f) {
    return f.templates.empty() ? PromptBundle::defaults() : PromptBundle::load(f.templates);
}

void merge_config(pipeline::RunConfig& cfg, const BackendFlags& f) {
    if (!f.config.empty()) pipeline::from_json(read_json_file(f.config), cfg);
    if (f.seed) cfg.seed = *f.seed;
    cfg.max_parallel = f.concurrency;
}

OmniInput read_item(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open item " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        // Accept a JSONL dataset and take its first item.
        std::istringstream lines(text);
        auto items = harness::parse_dataset(lines);
        if (items.empty()) throw Error(ErrorCode::ParseError, "no item in " + path.string());
        return items.front();
    }
    try {
        OmniInput x = j.get<OmniInput>();
        if (x.id.empty()) x.id = path.stem().string();
        return x;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("item: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// run

struct RunFlags {
    BackendFlags common;
    std::string item;
    std::string query;
    std::vector<std::string> options;
    std::string gold;
    std::string ablation;
    std::string engine;
    std::string pipeline_lm;
    std::string perceiver;
    std::string log;
};

int cmd_run(const RunFlags& f, std::ostream& out, std::ostream& err) {
    OmniInput x;
    if (!f.item.empty()) {
        x = read_item(f.item);
    } else if (!f.query.empty()) {
        x.id = "inline";
        x.query = f.query;
        for (const auto& o : f.options) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--option expects LABEL=text");
            x.options.push_back(AnswerOption{o.substr(0, eq), o.substr(eq + 1)});
        }
        if (!f.gold.empty()) x.gold = f.gold;
    } else {
        throw Error(ErrorCode::ConfigError, "run needs --item or --query");
    }

    pipeline::RunConfig cfg;
    merge_config(cfg, f.common);
    if (!f.ablation.empty()) cfg.ablation = pipeline::ablation_from_string(f.ablation);
    if (!f.engine.empty()) cfg.roles.reasoning_engine = f.engine;
    if (!f.pipeline_lm.empty()) {
        cfg.roles.policy_generator = f.pipeline_lm;
        cfg.roles.strategy_selector = f.pipeline_lm;
    }
    if (!f.perceiver.empty()) cfg.roles.intent_perceiver = f.perceiver;

    auto registry = build_registry(f.common, std::nullopt);
    std::ofstream log_file;
    std::unique_ptr<pipeline::JsonlRunLog> run_log;
    if (!f.log.empty()) {
        log_file.open(f.log, std::ios::app);
        if (!log_file) throw Error(ErrorCode::ConfigError, "cannot open run log " + f.log);
        run_log = std::make_unique<pipeline::JsonlRunLog>(log_file);
    }

    const pipeline::Pipeline p(registry, load_prompts(f.common), run_log.get());
    const auto outcome = p.run(x, cfg);
    out << json(outcome).dump() << '\n';
    err << "transport calls: " << registry.total_transport_calls() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
    BackendFlags common;
    std::string spec;
    std::string out;
    std::string dataset;
};

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream& err) {
    auto spec = harness::load_matrix_spec(f.spec);
    if (!f.dataset.empty()) spec.dataset = f.dataset;
    const auto items = harness::load_dataset(spec.dataset);

    pipeline::RunConfig base;
    pipeline::from_json(spec.run, base);
    merge_config(base, f.common);

    const fs::path out_dir(f.out);
    fs::create_directories(out_dir);
    auto registry = build_registry(f.common, out_dir / "cache");

    harness::MatrixOptions options;
    options.state_dir = out_dir;
    options.concurrency = f.common.concurrency;
    options.on_cell = [&err](const CellKey& c, bool resumed) {
        err << (resumed ? "resumed " : "ran ") << c.engine << " / " << (c.pipeline_lm.empty() ? "-" : c.pipeline_lm)
            << " / " << c.experiment << '\n';
    };
    const auto result = harness::run_matrix(spec, items, base, registry, load_prompts(f.common), options);

    const auto table = harness::to_report(spec, result);
    const auto md = harness::render_markdown(table);
    harness::write_file_atomic(out_dir / "records.jsonl", harness::records_jsonl(result.records));
    harness::write_file_atomic(out_dir / "report.md", md);
    harness::write_file_atomic(out_dir / "report.csv", harness::render_csv(table));

    const auto flagged = std::count_if(result.records.begin(), result.records.end(),
                                       [](const harness::EvalRecord& r) { return r.flagged; });
    out << md;
    err << "records: " << result.records.size() << " (" << flagged << " flagged); cells run: " << result.cells_run
        << ", resumed: " << result.cells_resumed << "; transport calls: " << registry.total_transport_calls() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simlab

struct SimlabFlags {
    std::string check;
    int seeds = 10;
    std::uint64_t first_seed = 0;
    bool sampled = false;
    std::size_t samples = 20'000;
    std::string card;
    std::string out;
};

simlab::Cardinalities parse_card(const std::string& text) {
    simlab::Cardinalities c;
    if (text.empty()) return c;
    std::vector<int> v;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        try {
            v.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "--card expects six integers X,I,S,S*,C,Y");
        }
    }
    if (v.size() != 6) throw Error(ErrorCode::ConfigError, "--card expects six integers X,I,S,S*,C,Y");
    c = simlab::Cardinalities{v[0], v[1], v[2], v[3], v[4], v[5]};
    return c;
}

int cmd_simlab(const SimlabFlags& f, std::ostream& out, std::ostream& err) {
    std::vector<std::string> checks;
    if (f.check == "all") {
        for (auto name : simlab::known_checks()) checks.emplace_back(name);
    } else {
        const auto names = simlab::known_checks();
        if (std::find(names.begin(), names.end(), f.check) == names.end()) {
            throw Error(ErrorCode::ConfigError, "unknown simlab check '" + f.check + "'");
        }
        checks.push_back(f.check);
    }
    simlab::CheckOptions options;
    options.exact = !f.sampled;
    options.samples = f.samples;
    options.card = parse_card(f.card);
    if (f.sampled && f.samples < 10'000) {
        err << "warning: " << f.samples << " samples gives wide standard errors; checks stay 3-sigma gated\n";
    }

    std::ofstream file;
    if (!f.out.empty()) {
        file.open(f.out, std::ios::trunc);
        if (!file) throw Error(ErrorCode::ConfigError, "cannot write " + f.out);
    }
    int failed = 0;
    for (const auto& check : checks) {
        for (int k = 0; k < f.seeds; ++k) {
            const auto report = simlab::run_check(check, f.first_seed + static_cast<std::uint64_t>(k), options);
            const std::string line = simlab::to_json(report).dump();
            out << line << '\n';
            if (file) file << line << '\n';
            if (!report.pass) ++failed;
        }
    }
    err << checks.size() * static_cast<std::size_t>(f.seeds) << " checks, " << failed << " failed\n";
    return failed == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// report

struct ReportFlags {
    std::string fixture;
    std::string records;
    std::string spec;
    std::string out;
};

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(c));
        else if (!out.empty() && out.back() != '-') out += '-';
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

int cmd_report(const ReportFlags& f, std::ostream& out, std::ostream& err) {
    std::vector<harness::ReportTable> tables;
    if (!f.fixture.empty()) {
        tables = harness::load_report_tables(f.fixture);
    } else if (!f.records.empty() && !f.spec.empty()) {
        const auto spec = harness::load_matrix_spec(f.spec);
        std::ifstream in(f.records);
        if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + f.records);
        std::map<CellKey, std::vector<harness::EvalRecord>> by_cell;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) throw Error(ErrorCode::ParseError, "record is not JSON", line_no);
            harness::EvalRecord r;
            try {
                r = j.get<harness::EvalRecord>();
            } catch (const json::exception& e) {
                throw Error(ErrorCode::ParseError, e.what(), line_no);
            }
            by_cell[CellKey{r.engine, r.pipeline_lm, r.ablation}].push_back(std::move(r));
        }
        harness::MatrixResult result;
        for (const auto& [cell, recs] : by_cell) result.cells[cell] = harness::accuracy(recs);
        tables.push_back(harness::to_report(spec, result));
    } else {
        throw Error(ErrorCode::ConfigError, "report needs --fixture, or --records with --spec");
    }

    std::string md;
    for (const auto& t : tables) {
        if (!md.empty()) md += '\n';
        md += harness::render_markdown(t);
    }
    out << md;
    if (!f.out.empty()) {
        const fs::path dir(f.out);
        harness::write_file_atomic(dir / "report.md", md);
        for (std::size_t k = 0; k < tables.size(); ++k) {
            const std::string name = tables.size() == 1 ? "report.csv"
                                     : tables[k].title.empty() ? "report-" + std::to_string(k + 1) + ".csv"
                                                               : "report-" + slug(tables[k].title) + ".csv";
            harness::write_file_atomic(dir / name, harness::render_csv(tables[k]));
        }
        err << "wrote " << (dir / "report.md").string() << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Intent-sketch reasoning pipeline, evaluation harness and verification lab", "intentsketch"};
    app.require_subcommand(1);

    RunFlags run;
    auto* run_cmd = app.add_subcommand("run", "Answer one item and print the outcome as JSON");
    add_backend_flags(run_cmd, run.common);
    run_cmd->add_option("--item", run.item, "Item JSON (or JSONL; the first line is used)");
    run_cmd->add_option("--query", run.query, "Inline question instead of --item");
    run_cmd->add_option("--option", run.options, "Answer option LABEL=text, repeatable");
    run_cmd->add_option("--gold", run.gold, "Gold label for the inline question");
    run_cmd->add_option("--ablation", run.ablation, "CG, CG_<label>, Abl_NI, Abl_SP or BaseLine");
    run_cmd->add_option("--engine", run.engine, "Reasoning engine backend id");
    run_cmd->add_option("--pipeline-lm", run.pipeline_lm, "Policy generator and strategy selector backend id");
    run_cmd->add_option("--perceiver", run.perceiver, "Intent perceiver backend id");
    run_cmd->add_option("--log", run.log, "Append per-stage JSONL records to this file");

    EvalFlags eval;
    auto* eval_cmd = app.add_subcommand("eval", "Run an experiment matrix and write records and reports");
    add_backend_flags(eval_cmd, eval.common);
    eval_cmd->add_option("--spec", eval.spec, "Matrix spec JSON")->required();
    eval_cmd->add_option("--out", eval.out, "Output directory (also the resume state)")->required();
    eval_cmd->add_option("--dataset", eval.dataset, "Override the spec's dataset path");

    SimlabFlags sim;
    auto* sim_cmd = app.add_subcommand("simlab", "Check the information-theoretic inequalities on synthetic worlds");
    sim_cmd->add_option("check", sim.check, "Check name or 'all'")->required();
    sim_cmd->add_option("--seeds", sim.seeds, "Number of seeded worlds")->check(CLI::Range(1, 1'000'000));
    sim_cmd->add_option("--seed", sim.first_seed, "First seed");
    sim_cmd->add_flag("--exact", [&sim](std::int64_t) { sim.sampled = false; }, "Exhaustive computation (default)");
    sim_cmd->add_flag("--sampled", sim.sampled, "Plug-in estimates from samples");
    sim_cmd->add_option("--n", sim.samples, "Samples per world in sampled mode")->check(CLI::Range(2, 100'000'000));
    sim_cmd->add_option("--card", sim.card, "Cardinalities X,I,S,S*,C,Y");
    sim_cmd->add_option("--out", sim.out, "Also write the JSON lines to this file");

    ReportFlags rep;
    auto* rep_cmd = app.add_subcommand("report", "Render accuracy tables as markdown and CSV");
    rep_cmd->add_option("--fixture", rep.fixture, "Published-tables JSON");
    rep_cmd->add_option("--records", rep.records, "records.jsonl from eval");
    rep_cmd->add_option("--spec", rep.spec, "Matrix spec that produced the records");
    rep_cmd->add_option("--out", rep.out, "Directory for report.md and CSV files");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run, out, err);
        if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
        if (sim_cmd->parsed()) return cmd_simlab(sim, out, err);
        return cmd_report(rep, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace intentsketch::cli
