#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "orange/gateway.hpp"
#include "orange/log_store.hpp"
#include "orange/memory.hpp"
#include "orange/schema.hpp"
#include "orange/sql_exec.hpp"

namespace orange {

enum class DemoSelection { Ranked, Random };

struct CoderConfig {
    std::size_t shots = 30;
    std::size_t paths = 5;
    double temperature = 0.8;
    bool fallback_full_schema = true;
    bool schema_linking = true;  // false: always render the full schema
    DemoSelection selection = DemoSelection::Ranked;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    /// Throws ConfigError when paths is zero or the temperature is negative.
    void validate() const;
};

/// Union of the schema items used by the demonstrations' SQL. With the fallback
/// on, an empty union becomes the whole schema.
SchemaSubset link_schema(const DemoSet& demos, const SchemaCatalog& catalog, bool fallback_full_schema = true);

/// Coder prompt: instruction, linked schema, demonstrations (least similar first),
/// evidence when present, question, output format.
std::string build_prompt(const TranslationTask& task, const SchemaSubset& linked, const DemoSet& demos,
                         const SchemaCatalog& catalog);

std::vector<ChatMessage> coder_messages(const std::string& prompt);

/// Index of the representative of the largest non-error cluster; ties go to the
/// earlier representative. Throws NoValidResult if every cluster is an error.
std::size_t vote(const ClusterPartition& partition);

struct Translation {
    std::string sql;
    CandidateSet paths;  // extracted SQL in path order
    ClusterPartition partition;
    DemoSet demos;
    SchemaSubset linked;
    std::string prompt;
};

/// Retrieves demonstrations, links the schema, samples `paths` completions and
/// votes over their execution results. Throws TranslateError when no completion
/// yields SQL.
Translation translate(const TranslationTask& task, const MemoryView& view, const SchemaCatalog& catalog,
                      const CoderConfig& cfg, Gateway& gateway, const std::filesystem::path& db_path,
                      const ExecLimits& limits);

}  // namespace orange
