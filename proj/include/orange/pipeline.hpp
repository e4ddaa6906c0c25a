#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/coder.hpp"
#include "orange/eval.hpp"
#include "orange/gateway.hpp"
#include "orange/log_store.hpp"
#include "orange/memory.hpp"
#include "orange/parser_agent.hpp"
#include "orange/schema.hpp"
#include "orange/validator.hpp"

namespace orange {

struct RunConfig {
    HistoryMode history = HistoryMode::Accumulated;
    ValidatorConfig validator;
    CoderConfig coder;
    ParserConfig parser;
    ExecLimits limits;
    std::filesystem::path log;
    std::filesystem::path db_dir;
    std::filesystem::path memory_dir;  // empty: <out_dir>/memory
    std::filesystem::path out_dir;
    bool majority_only = false;  // predict the majority candidate, no knowledge at all
    bool translate = true;       // false: build knowledge only
    std::size_t workers = 1;

    /// Throws ConfigError for invalid values or missing paths.
    void validate() const;
    std::filesystem::path effective_memory_dir() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

/// `<db_dir>/<db_id>.sqlite`, `.db`, or `<db_dir>/<db_id>/<db_id>.sqlite`.
/// Throws ConfigError when none exists.
std::filesystem::path resolve_db_path(const std::filesystem::path& db_dir, const std::string& db_id);

struct TaskResult {
    std::string task_id;
    std::string db_id;
    std::string predicted_sql;
    std::size_t candidates = 0;
    std::size_t clusters = 0;
    std::size_t units_inserted = 0;
    std::size_t snapshot_size = 0;  // units visible to the translation
    std::size_t memory_size = 0;    // units in the database's memory afterwards
    std::string error;              // empty on success
};

struct KuCount {
    double average = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
};

struct RunReport {
    std::vector<TaskResult> tasks;
    EvalReport eval;
    std::map<std::string, KuCount> ku_counts;        // snapshot sizes per database
    std::map<std::string, std::size_t> memory_units;  // final memory size per database
    std::size_t failed_tasks = 0;

    std::size_t total_units() const;
    nlohmann::json to_json() const;
};

/// Per-database resources shared by the tasks of one run.
struct DbContext {
    std::filesystem::path path;
    SchemaCatalog catalog;
    std::unique_ptr<Memory> memory;
};

class RunState {
public:
    RunState(RunConfig cfg, Gateway& gateway);

    const RunConfig& config() const { return cfg_; }
    Gateway& gateway() { return gateway_; }
    DbContext& db(const std::string& db_id);

    void write_transcript(const std::string& task_id, const nlohmann::json& transcript) const;

private:
    RunConfig cfg_;
    Gateway& gateway_;
    std::map<std::string, std::unique_ptr<DbContext>> dbs_;
};

/// Knowledge stages for one task: cluster, decompose representatives, de-duplicate,
/// validate, insert. Returns the number of units inserted; appends parser
/// conversations to `transcript["parser"]`.
std::size_t build_knowledge(const LogEntry& entry, RunState& state, nlohmann::json& transcript);

/// All stages for one task. In all-history mode the knowledge stages are expected
/// to have run already, so only translation happens here.
TaskResult process_task(const LogEntry& entry, RunState& state);

/// Processes the log in order and writes predictions.jsonl, report.json,
/// config.json, transcripts/ and memory files. Per-task failures are recorded in
/// the report; configuration problems throw ConfigError before any work.
RunReport run(const RunConfig& cfg, Gateway& gateway);
RunReport run(const std::vector<LogEntry>& entries, const RunConfig& cfg, Gateway& gateway);

}  // namespace orange
