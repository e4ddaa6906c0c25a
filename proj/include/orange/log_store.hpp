#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/sql_exec.hpp"

namespace orange {

class Gateway;
class SchemaCatalog;

struct TranslationTask {
    std::string task_id;
    std::string db_id;
    std::string question;
    std::string evidence;  // empty when the benchmark gives none
    std::optional<std::string> gold_sql;  // evaluation only
    std::optional<std::string> difficulty;
    std::size_t sequence_index = 0;
};

struct Candidate {
    std::string sql;
    std::string generator_tag;
};

struct CandidateSet {
    std::string task_id;
    std::vector<Candidate> candidates;  // generation order
};

struct LogEntry {
    TranslationTask task;
    CandidateSet candidates;
};

struct Cluster {
    ResultFingerprint fingerprint;
    std::vector<std::size_t> members;  // ascending
    std::size_t representative = 0;    // == members.front()

    bool is_error() const { return fingerprint.is_error; }
    std::size_t size() const { return members.size(); }
};

/// Candidates grouped by execution fingerprint: largest cluster first, ties
/// broken by the earlier representative.
struct ClusterPartition {
    std::vector<Cluster> clusters;
    std::size_t total_candidates = 0;

    /// Index into `clusters` of the cluster holding `candidate`.
    std::optional<std::size_t> cluster_of(std::size_t candidate) const;
};

ClusterPartition partition_by_fingerprint(const std::vector<ResultFingerprint>& fingerprints);

/// Executes every candidate once (up to `workers` at a time) and clusters the outcomes.
ClusterPartition cluster_candidates(const CandidateSet& cands, const std::filesystem::path& db_path,
                                    const ExecLimits& limits, std::size_t workers = 1);

/// Parses a line-delimited translation log. Tasks come back in file order with
/// sequence_index 0, 1, 2, ... Throws LogFormatError naming the bad line.
/// With `require_candidates` false, records without candidates are accepted
/// (question files fed to the zero-shot generator).
std::vector<LogEntry> load_log(const std::filesystem::path& path, bool require_candidates = true);

LogEntry parse_log_record(const nlohmann::json& record, std::size_t line, bool require_candidates = true);
nlohmann::json to_json(const LogEntry& entry);
void write_log(const std::filesystem::path& path, const std::vector<LogEntry>& entries);

inline constexpr std::string_view kZeroShotTag = "builtin-zeroshot";

/// Cold-start generator: `n` zero-shot samples over the full schema, in order.
/// Throws std::invalid_argument for n == 0 and GatewayError on gateway failure.
CandidateSet generate_candidates(const TranslationTask& task, const SchemaCatalog& catalog, Gateway& gateway,
                                 std::size_t n, double temperature = 0.8, std::uint64_t seed = 0);

}  // namespace orange
