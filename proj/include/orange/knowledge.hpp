#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/gateway.hpp"
#include "orange/sql_exec.hpp"

namespace orange {

struct Provenance {
    std::string task_id;
    std::size_t task_sequence_index = 0;
    std::size_t candidate_index = 0;  // index of the decomposed candidate in its task's log entry
    std::size_t step_index = 0;

    bool operator==(const Provenance&) const = default;
};

/// A verified question/SQL pair with its reasoning and a short result preview.
struct KnowledgeUnit {
    std::string unit_id;
    std::string db_id;
    std::string question;
    std::string sql;
    std::string reasoning;
    std::vector<Row> exec_preview;  // at most kPreviewRows rows
    ResultFingerprint exec_fingerprint;
    double probability = 0.0;
    Embedding embedding;
    Provenance provenance;
    std::uint64_t inserted_at = 0;

    /// Uniqueness key inside a memory: normalized SQL plus result digest.
    std::string identity() const;
};

inline constexpr std::size_t kPreviewRows = 3;

/// Stable id derived from db, normalized SQL and fingerprint.
std::string make_unit_id(const std::string& db_id, const std::string& sql, const ResultFingerprint& fp);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);
nlohmann::json rows_to_json(const std::vector<Row>& rows);
std::vector<Row> rows_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ResultFingerprint& fp);
ResultFingerprint fingerprint_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KnowledgeUnit& u);
KnowledgeUnit unit_from_json(const nlohmann::json& j);

}  // namespace orange
