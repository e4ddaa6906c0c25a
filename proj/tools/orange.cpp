// orange: build database-specific knowledge from translation logs and use it
// to translate, evaluate, sweep and ablate.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "orange/errors.hpp"
#include "orange/eval.hpp"
#include "orange/experiments.hpp"
#include "orange/fixtures.hpp"
#include "orange/mock_responder.hpp"
#include "orange/pipeline.hpp"

namespace fs = std::filesystem;
using namespace orange;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRunError = 2;

struct Globals {
    std::string db_dir;
    std::string log;
    std::string memory_dir;
    std::string out = "runs/latest";
    std::string mode = "mock";
    std::string upstream = "http";
    std::string cassette;
    std::string mock_script;
    std::uint64_t mock_seed = 0;
    std::string history = "accumulated";
    double tau = 0.3;
    std::size_t shots = 30;
    std::size_t paths = 5;
    std::uint64_t seed = 0;
    double timeout = 30.0;
    std::size_t max_rows = 10'000;
    double temperature = 0.8;
    bool no_schema_linking = false;
    std::size_t workers = 1;
    bool verbose = false;
};

RunConfig run_config(const Globals& g) {
    RunConfig c;
    c.history = history_mode_from_string(g.history);
    c.validator.tau = g.tau;
    c.coder.shots = g.shots;
    c.coder.paths = g.paths;
    c.coder.seed = g.seed;
    c.coder.temperature = g.temperature;
    c.coder.schema_linking = !g.no_schema_linking;
    c.limits.timeout_seconds = g.timeout;
    c.limits.max_rows = g.max_rows;
    c.log = g.log;
    c.db_dir = g.db_dir;
    c.memory_dir = g.memory_dir;
    c.out_dir = g.out;
    c.workers = g.workers;
    return c;
}

std::shared_ptr<Backend> mock_backend(const Globals& g) {
    auto mock = std::make_shared<MockBackend>(g.mock_seed);
    if (!g.mock_script.empty())
        for (auto& rule : MockBackend::load_script(g.mock_script)) mock->add_rule(std::move(rule));
    return mock;
}

std::unique_ptr<Gateway> make_gateway(const Globals& g, const fs::path& run_dir) {
    GatewayOptions o;
    o.mode = gateway_mode_from_string(g.mode);
    o.max_in_flight = static_cast<int>(std::max<std::size_t>(4, g.workers));
    if (o.mode == GatewayMode::Record || o.mode == GatewayMode::Replay)
        o.cassette = g.cassette.empty() ? run_dir / "cassettes" / "gateway.jsonl" : fs::path(g.cassette);
    if (o.mode == GatewayMode::Mock || (o.mode == GatewayMode::Record && g.upstream == "mock")) {
        o.upstream = mock_backend(g);
    } else if (o.mode != GatewayMode::Replay) {
        auto endpoints = HttpEndpoints::from_environment();
        o.chat_model = endpoints.chat_model;
        o.upstream = std::make_shared<HttpBackend>(std::move(endpoints));
    }
    return std::make_unique<Gateway>(std::move(o));
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

void print_summary(const RunReport& r, const fs::path& out) {
    std::cout << "tasks: " << r.tasks.size() << "  failed: " << r.failed_tasks << "\n";
    if (r.eval.scored) std::cout << "EX: " << r.eval.ex << " over " << r.eval.scored << " tasks\n";
    for (const auto& [db, k] : r.ku_counts)
        std::cout << "KU " << db << ": average " << k.average << ", min " << k.min << ", max " << k.max
                  << ", memory " << r.memory_units.at(db) << "\n";
    std::cout << "run directory: " << out.string() << "\n";
}

int finish(const RunReport& r, const fs::path& out) {
    print_summary(r, out);
    return r.failed_tasks ? kRunError : kOk;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("not a number in --values: " + item);
        }
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_ingest(const Globals& g, const std::string& questions, const std::string& out_log, std::size_t n) {
    require(questions, "--questions");
    require(out_log, "--out-log");
    require(g.db_dir, "--db-dir");
    auto entries = load_log(questions, false);
    auto gateway = make_gateway(g, g.out);
    std::map<std::string, SchemaCatalog> catalogs;
    int status = kOk;
    for (auto& e : entries) {
        try {
            auto it = catalogs.find(e.task.db_id);
            if (it == catalogs.end())
                it = catalogs.emplace(e.task.db_id, load_catalog(resolve_db_path(g.db_dir, e.task.db_id))).first;
            e.candidates = generate_candidates(e.task, it->second, *gateway, n, g.temperature, g.seed);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& err) {
            spdlog::error("task {}: {}", e.task.task_id, err.what());
            status = kRunError;
        }
    }
    write_log(out_log, entries);
    std::cout << "wrote " << entries.size() << " tasks to " << out_log << "\n";
    return status;
}

int cmd_evaluate(const Globals& g, const std::string& predictions, const std::string& report_path) {
    require(g.log, "--log");
    require(g.db_dir, "--db-dir");
    require(predictions, "--predictions");
    ExecLimits limits{g.timeout, g.max_rows};
    limits.validate();
    const auto report = evaluate(load_log(g.log), load_predictions(predictions), g.db_dir, limits);
    const auto text = report.to_json().dump(2) + "\n";
    if (!report_path.empty()) std::ofstream(report_path) << text;
    std::cout << "EX: " << report.ex << " over " << report.scored << " tasks (" << report.invalid_gold
              << " with invalid gold)\n";
    for (const auto& [tag, ex] : report.ex_by_difficulty) std::cout << "  " << tag << ": " << ex << "\n";
    return kOk;
}

int cmd_replay(const Globals& g, const std::string& run_dir) {
    require(run_dir, "--run-dir");
    const fs::path dir(run_dir);
    const auto cfg_path = dir / "config.json";
    if (!fs::exists(cfg_path)) throw ConfigError("no config.json in " + run_dir);
    std::ifstream in(cfg_path);
    auto cfg = RunConfig::from_json(nlohmann::json::parse(in));
    const auto cassette = g.cassette.empty() ? dir / "cassettes" / "gateway.jsonl" : fs::path(g.cassette);
    cfg.out_dir = dir / "replay";
    cfg.memory_dir.clear();
    fs::remove_all(cfg.out_dir);
    GatewayOptions o;
    o.mode = GatewayMode::Replay;
    o.cassette = cassette;
    Gateway gateway(std::move(o));
    const auto report = run(cfg, gateway);
    bool same = true;
    for (const char* name : {"predictions.jsonl", "report.json"}) {
        const bool eq = read_file(dir / name) == read_file(cfg.out_dir / name);
        std::cout << name << ": " << (eq ? "identical" : "DIFFERENT") << "\n";
        same = same && eq;
    }
    if (gateway.upstream_calls() != 0) same = false;
    return same && report.failed_tasks == 0 ? kOk : kRunError;
}

int cmd_make_fixtures(Globals g, const std::string& out, bool record) {
    require(out, "--out");
    const auto corpus = make_fixtures(out);
    std::cout << "fixture databases in " << corpus.db_dir.string() << ", log " << corpus.log.string() << "\n";
    if (!record) return kOk;
    g.db_dir = corpus.db_dir.string();
    g.log = corpus.log.string();
    g.mode = "record";
    g.upstream = "mock";
    int status = kOk;
    for (const char* mode : {"self", "accumulated", "all"}) {
        g.history = mode;
        g.out = (fs::path(out) / "runs" / mode).string();
        fs::remove_all(g.out);
        auto gateway = make_gateway(g, g.out);
        const auto report = run(run_config(g), *gateway);
        std::cout << mode << ": recorded " << gateway->upstream_calls() << " calls under " << g.out << "\n";
        if (report.failed_tasks) status = kRunError;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orange: self-evolving text-to-SQL over translation logs"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--db-dir", g.db_dir, "Directory holding <db_id>.sqlite files");
    app.add_option("--log", g.log, "Translation log (line-delimited JSON)");
    app.add_option("--memory-dir", g.memory_dir, "Knowledge base directory (default <out>/memory)");
    app.add_option("--out", g.out, "Run directory")->capture_default_str();
    app.add_option("--mode", g.mode, "Gateway mode")
        ->check(CLI::IsMember({"live", "record", "replay", "mock"}))
        ->capture_default_str();
    app.add_option("--upstream", g.upstream, "Backend behind record mode")
        ->check(CLI::IsMember({"http", "mock"}))
        ->capture_default_str();
    app.add_option("--cassette", g.cassette, "Cassette file (default <out>/cassettes/gateway.jsonl)");
    app.add_option("--mock-script", g.mock_script, "JSON rules for the mock backend");
    app.add_option("--mock-seed", g.mock_seed, "Seed of the mock backend")->capture_default_str();
    app.add_option("--history", g.history, "History mode")
        ->check(CLI::IsMember({"self", "accumulated", "all"}))
        ->capture_default_str();
    app.add_option("--tau", g.tau, "Probability threshold")->capture_default_str();
    app.add_option("--shots", g.shots, "Demonstrations per prompt")->capture_default_str();
    app.add_option("--paths", g.paths, "Generation paths for voting")->capture_default_str();
    app.add_option("--seed", g.seed, "Sampling seed")->capture_default_str();
    app.add_option("--timeout", g.timeout, "Per-query timeout in seconds")->capture_default_str();
    app.add_option("--max-rows", g.max_rows, "Rows kept per result")->capture_default_str();
    app.add_option("--temperature", g.temperature, "Sampling temperature")->capture_default_str();
    app.add_flag("--no-schema-linking", g.no_schema_linking, "Always render the full schema");
    app.add_option("--workers", g.workers, "Concurrent executions and model calls")->capture_default_str();
    app.add_flag("-v,--verbose", g.verbose, "Debug logging");

    std::string questions, out_log;
    std::size_t n = 5;
    auto* ingest = app.add_subcommand("ingest", "Generate zero-shot candidates for a questions file");
    ingest->add_option("--questions", questions, "Tasks without candidates")->required();
    ingest->add_option("--out-log", out_log, "Where to write the translation log")->required();
    ingest->add_option("-n", n, "Candidates per task")->capture_default_str();

    auto* build = app.add_subcommand("build-kb", "Build knowledge from the log without translating");
    app.add_subcommand("translate", "Build knowledge and translate every task");

    std::string predictions, report_path;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions by execution accuracy");
    evaluate_cmd->add_option("--predictions", predictions, "predictions.jsonl")->required();
    evaluate_cmd->add_option("--report", report_path, "Write the JSON report here");

    std::string param, values;
    auto* sweep_cmd = app.add_subcommand("sweep", "One run per parameter value");
    sweep_cmd->add_option("--param", param, "shots or tau")->required()->check(CLI::IsMember({"shots", "tau"}));
    sweep_cmd->add_option("--values", values, "Comma-separated values")->required();

    std::string which;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run with one component removed");
    ablate_cmd->add_option("--which", which, "history|validator|ranking|schema_linking|all")
        ->required()
        ->check(CLI::IsMember({"history", "validator", "ranking", "schema_linking", "all"}));

    std::string fixtures_out;
    bool record = false;
    auto* fixtures_cmd = app.add_subcommand("make-fixtures", "Write the desk-scale fixture corpus");
    fixtures_cmd->add_option("--out", fixtures_out, "Output directory")->required();
    fixtures_cmd->add_flag("--record", record, "Also record a mock-backed run, with its cassette, for every history mode");

    std::string run_dir;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a run directory from its cassette and compare");
    replay_cmd->add_option("--run-dir", run_dir, "Run directory to check")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::warn);

    try {
        if (*ingest) return cmd_ingest(g, questions, out_log, n);
        if (*evaluate_cmd) return cmd_evaluate(g, predictions, report_path);
        if (*fixtures_cmd) return cmd_make_fixtures(g, fixtures_out, record);
        if (*replay_cmd) return cmd_replay(g, run_dir);

        require(g.log, "--log");
        require(g.db_dir, "--db-dir");
        auto cfg = run_config(g);
        cfg.validate();
        if (*sweep_cmd) {
            const auto p = sweep_param_from_string(param);
            const auto rows = sweep(p, parse_values(values), cfg, [&](const fs::path& dir) { return make_gateway(g, dir); });
            const auto table = format_sweep(p, rows);
            fs::create_directories(cfg.out_dir);
            std::ofstream(cfg.out_dir / ("sweep-" + param + ".tsv")) << table;
            std::cout << table;
            return kOk;
        }
        if (*build) cfg.translate = false;
        if (*ablate_cmd) cfg = apply_ablation(cfg, ablation_from_string(which));
        auto gateway = make_gateway(g, cfg.out_dir);
        return finish(run(cfg, *gateway), cfg.out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRunError;
    }
}
