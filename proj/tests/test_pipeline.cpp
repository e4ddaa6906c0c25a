#include <doctest.h>

#include "orange/errors.hpp"
#include "orange/experiments.hpp"
#include "orange/mock_responder.hpp"
#include "orange/pipeline.hpp"
#include "support.hpp"

using namespace orange;
using nlohmann::json;

namespace {

RunConfig base_config(const fs::path& out) {
    const auto& fx = test::fixtures();
    RunConfig cfg;
    cfg.log = fx.log;
    cfg.db_dir = fx.db_dir;
    cfg.out_dir = out;
    cfg.coder.paths = 3;
    cfg.coder.shots = 8;
    return cfg;
}

std::vector<LogEntry> first(std::size_t n) {
    auto entries = load_log(test::fixtures().log);
    entries.resize(n);
    return entries;
}

}  // namespace

TEST_CASE("resolve_db_path tries the known layouts") {
    test::TempDir dir;
    test::make_db(dir / "a.db", "CREATE TABLE t (x);");
    fs::create_directories(dir / "b");
    test::make_db(dir / "b" / "b.sqlite", "CREATE TABLE t (x);");
    CHECK(resolve_db_path(dir.path(), "a") == dir / "a.db");
    CHECK(resolve_db_path(dir.path(), "b") == dir / "b" / "b.sqlite");
    CHECK_THROWS_AS(resolve_db_path(dir.path(), "c"), ConfigError);
}

TEST_CASE("config validation and JSON round-trip") {
    test::TempDir dir;
    auto cfg = base_config(dir / "out");
    cfg.history = HistoryMode::All;
    cfg.validator.tau = 0.4;
    const auto again = RunConfig::from_json(cfg.to_json());
    CHECK(again.to_json() == cfg.to_json());
    CHECK(cfg.effective_memory_dir() == dir / "out" / "memory");
    cfg.validator.tau = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    auto missing = base_config(dir / "out");
    missing.db_dir = dir / "nope";
    CHECK_THROWS_AS(missing.validate(), ConfigError);
}

TEST_CASE("a run writes predictions, report, config, transcripts and memory") {
    test::TempDir dir;
    const auto cfg = base_config(dir / "out");
    auto gw = test::mock_gateway();
    const auto report = run(first(9), cfg, *gw);
    CHECK(report.tasks.size() == 9);
    CHECK(report.failed_tasks == 0);
    CHECK(report.eval.scored == 9);
    CHECK(fs::exists(dir / "out" / "config.json"));
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK(fs::exists(dir / "out" / "transcripts" / "tox-001.json"));
    CHECK(load_predictions(dir / "out" / "predictions.jsonl").size() == 9);
    for (const auto& db : test::fixtures().db_ids) {
        REQUIRE(fs::exists(dir / "out" / "memory" / (db + ".jsonl")));
        CHECK(Memory::load(dir / "out" / "memory" / (db + ".jsonl")).size() == report.memory_units.at(db));
    }
    CHECK(report.total_units() > 0);
    const auto transcript = json::parse(test::slurp(dir / "out" / "transcripts" / "tox-001.json"));
    CHECK(transcript.contains("parser"));
    CHECK(transcript["coder"].contains("prompt"));
    const auto text = test::slurp(dir / "out" / "report.json");
    CHECK(text.find(dir.path().string()) == std::string::npos);
}

TEST_CASE("accumulated snapshots grow within a database") {
    test::TempDir dir;
    auto gw = test::mock_gateway();
    const auto report = run(first(12), base_config(dir / "out"), *gw);
    std::map<std::string, std::size_t> last;
    for (const auto& t : report.tasks) {
        CHECK(t.snapshot_size >= last[t.db_id]);
        last[t.db_id] = t.memory_size;
    }
}

TEST_CASE("majority-only runs make no gateway calls") {
    test::TempDir dir;
    auto cfg = apply_ablation(base_config(dir / "out"), Ablation::All);
    CHECK(cfg.majority_only);
    auto gw = test::mock_gateway();
    const auto entries = first(6);
    const auto report = run(entries, cfg, *gw);
    CHECK(gw->upstream_calls() == 0);
    CHECK(gw->chat_calls() == 0);
    CHECK(report.total_units() == 0);
    for (std::size_t i = 0; i < entries.size(); ++i)
        CHECK(report.tasks[i].predicted_sql ==
              entries[i].candidates.candidates[vote(cluster_candidates(entries[i].candidates,
                                                                       resolve_db_path(cfg.db_dir, entries[i].task.db_id),
                                                                       cfg.limits))]
                  .sql);
}

TEST_CASE("per-task failures are recorded, not fatal") {
    test::TempDir dir;
    auto gw = test::fn_gateway([](const ChatRequest& req) -> std::string {
        if (req.purpose == "coder") return "no sql here";
        return "```step\nSUB_SQL: SELECT 1\nREASONING: r\nQUESTION: q\n```";
    });
    const auto report = run(first(3), base_config(dir / "out"), *gw);
    CHECK(report.failed_tasks == 3);
    for (const auto& t : report.tasks) CHECK_FALSE(t.error.empty());
    CHECK(report.eval.ex == 0.0);
}

TEST_CASE("ablation switches") {
    test::TempDir dir;
    const auto cfg = base_config(dir / "out");
    CHECK(apply_ablation(cfg, Ablation::History).history == HistoryMode::SelfOnly);
    CHECK(apply_ablation(cfg, Ablation::Validator).validator.tau == 0.0);
    CHECK(apply_ablation(cfg, Ablation::Ranking).coder.selection == DemoSelection::Random);
    CHECK_FALSE(apply_ablation(cfg, Ablation::SchemaLinking).coder.schema_linking);
    CHECK(ablation_from_string("schema_linking") == Ablation::SchemaLinking);
    CHECK_THROWS(ablation_from_string("nothing"));
}

TEST_CASE("sweep runs each distinct value in its own directory") {
    test::TempDir dir;
    auto cfg = base_config(dir / "sweep");
    const auto entries = first(3);
    write_log(dir / "small.jsonl", entries);
    cfg.log = dir / "small.jsonl";
    const auto rows = sweep(SweepParam::Tau, {0.0, 0.5, 0.5, 1.0}, cfg,
                            [](const fs::path&) { return test::mock_gateway(); });
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].units >= rows[1].units);
    CHECK(rows[1].units >= rows[2].units);
    CHECK(fs::exists(rows[2].run_dir / "report.json"));
    const auto tsv = format_sweep(SweepParam::Tau, rows);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 4);
}

TEST_CASE("gold SQL never reaches a prompt") {
    test::TempDir dir;
    auto entries = first(6);
    for (auto& e : entries) e.task.gold_sql = "SELECT 'gold-sentinel-" + e.task.task_id + "'";
    auto cfg = base_config(dir / "out");
    orange::GatewayOptions o;
    o.mode = GatewayMode::Record;
    o.cassette = dir / "out" / "cassettes" / "gateway.jsonl";
    o.upstream = std::make_shared<MockBackend>(0);
    Gateway g(o);
    run(entries, cfg, g);
    CHECK(test::slurp(*o.cassette).find("gold-sentinel") == std::string::npos);
    for (const auto& e : entries)
        CHECK(test::slurp(dir / "out" / "transcripts" / (e.task.task_id + ".json")).find("gold-sentinel") ==
              std::string::npos);
}
