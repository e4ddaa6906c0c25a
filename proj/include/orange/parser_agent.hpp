#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orange/gateway.hpp"
#include "orange/knowledge.hpp"
#include "orange/log_store.hpp"
#include "orange/schema.hpp"
#include "orange/sql_exec.hpp"

namespace orange {

struct ParseStep {
    std::size_t step_index = 0;
    std::string sub_sql;
    std::string reasoning;
    std::string question;
    ResultFingerprint exec_fingerprint;
    std::vector<Row> exec_preview;
};

struct ParseTrace {
    std::string candidate_sql;
    std::vector<ParseStep> steps;
    std::string conversation_id;
    std::vector<ChatMessage> transcript;  // every message sent or received, in order
};

/// One fenced block of model output. Fields the block did not carry stay empty.
struct PlanEntry {
    std::string sub_sql;
    std::optional<std::string> reasoning;
    std::optional<std::string> question;
};

/// Pulls every fenced block holding SUB_SQL / REASONING / QUESTION fields, in
/// order. Field values may span lines. Throws ParseFormatError if none is found.
std::vector<PlanEntry> parse_model_plan(std::string_view text);

struct ParserConfig {
    std::size_t retries = 2;    // extra attempts per malformed turn
    std::size_t max_steps = 8;  // sub-queries kept per candidate
    ExecLimits limits;
};

/// Decomposes one candidate in a single conversation: a plan turn that lists the
/// sub-queries, then one annotation turn per sub-query. The task question is never
/// sent; only schema, evidence and SQL are. Sub-queries that fail to execute are
/// dropped. Throws ParseError once a turn exhausts its retries.
ParseTrace decompose(const std::string& candidate, const SchemaCatalog& catalog, const std::string& evidence,
                     Gateway& gateway, const std::filesystem::path& db_path, const ParserConfig& cfg = {});

/// Knowledge units of a trace, without embeddings or probabilities.
std::vector<KnowledgeUnit> units_from_trace(const ParseTrace& trace, const TranslationTask& task,
                                            std::size_t candidate_index);

/// Drops every unit whose result is NULL-like or repeats an earlier kept unit's result.
std::vector<KnowledgeUnit> dedup(const std::vector<KnowledgeUnit>& units);

}  // namespace orange
