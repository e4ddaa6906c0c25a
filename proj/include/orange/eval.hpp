#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/log_store.hpp"
#include "orange/sql_exec.hpp"

namespace orange {

struct ExOutcome {
    int ex = 0;
    bool gold_valid = true;  // false: gold failed to execute, task excluded
    ErrorClass prediction_error = ErrorClass::None;
};

/// 1 when the prediction and the gold query produce equal fingerprints.
ExOutcome execution_accuracy(std::string_view predicted, std::string_view gold, const std::filesystem::path& db_path,
                             const ExecLimits& limits);

struct EvalRecord {
    std::string task_id;
    std::string db_id;
    std::string predicted_sql;
    std::string gold_sql;
    int ex = 0;
    bool gold_valid = true;
    ErrorClass error_class = ErrorClass::None;
    std::optional<std::string> difficulty;
};

struct EvalReport {
    std::vector<EvalRecord> tasks;  // log order
    double ex = 0.0;                // mean over tasks with valid gold
    std::size_t scored = 0;
    std::size_t invalid_gold = 0;
    std::map<std::string, double> ex_by_difficulty;

    nlohmann::json to_json() const;
};

/// Fills the aggregate fields from `tasks`.
EvalReport summarize(std::vector<EvalRecord> tasks);

/// Scores predictions (task_id -> SQL) against the gold SQL of `entries`.
/// Tasks without gold are skipped; tasks without a prediction score 0.
EvalReport evaluate(const std::vector<LogEntry>& entries, const std::map<std::string, std::string>& predictions,
                    const std::filesystem::path& db_dir, const ExecLimits& limits);

/// Reads a predictions.jsonl file into task_id -> SQL.
std::map<std::string, std::string> load_predictions(const std::filesystem::path& path);

}  // namespace orange
