#include "orange/coder.hpp"

#include <spdlog/spdlog.h>

#include "orange/errors.hpp"
#include "orange/parallel.hpp"
#include "orange/prompts.hpp"
#include "orange/schema_items.hpp"
#include "orange/sql_text.hpp"

namespace orange {

void CoderConfig::validate() const {
    if (paths == 0) throw ConfigError("paths must be at least 1");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
}

SchemaSubset link_schema(const DemoSet& demos, const SchemaCatalog& catalog, bool fallback_full_schema) {
    SchemaSubset linked;
    for (const auto& d : demos.demos) {
        try {
            const auto items = extract_schema_items(d.sql, catalog);
            linked.ids.insert(items.ids.begin(), items.ids.end());
        } catch (const ExtractError& e) {
            spdlog::warn("skipping demonstration {} for schema linking: {}", d.unit_id, e.what());
        }
    }
    if (linked.empty() && fallback_full_schema) return SchemaSubset::everything();
    return linked;
}

std::string build_prompt(const TranslationTask& task, const SchemaSubset& linked, const DemoSet& demos,
                         const SchemaCatalog& catalog) {
    std::string out(prompts::kCoderInstruction);
    out += "\n\n";
    out += prompts::kSchemaSection;
    out += "\n" + render_schema(catalog, linked) + "\n";
    out += prompts::kDemoSection;
    out += "\n";
    for (auto it = demos.demos.rbegin(); it != demos.demos.rend(); ++it) {
        out += "Question: " + collapse_whitespace(it->question) + "\n";
        out += "SQL: " + collapse_whitespace(it->sql) + "\n";
        out += "Exec_result: " + render_rows(it->exec_preview, kPreviewRows) + "\n\n";
    }
    if (demos.demos.empty()) out += "\n";
    if (!trim(task.evidence).empty()) {
        out += prompts::kEvidenceSection;
        out += "\n" + trim(task.evidence) + "\n\n";
    }
    out += prompts::kQuestionSection;
    out += "\n" + trim(task.question) + "\n\n";
    out += prompts::kFormatSection;
    out += "\n";
    out += prompts::kFormatDirective;
    out += "\n";
    return out;
}

std::vector<ChatMessage> coder_messages(const std::string& prompt) {
    return {{"system", std::string(prompts::kCoderSystem)}, {"user", prompt}};
}

std::size_t vote(const ClusterPartition& partition) {
    const Cluster* best = nullptr;
    for (const auto& c : partition.clusters) {
        if (c.is_error()) continue;
        if (!best || c.size() > best->size() || (c.size() == best->size() && c.representative < best->representative))
            best = &c;
    }
    if (!best) throw NoValidResult("every candidate failed to execute");
    return best->representative;
}

Translation translate(const TranslationTask& task, const MemoryView& view, const SchemaCatalog& catalog,
                      const CoderConfig& cfg, Gateway& gateway, const std::filesystem::path& db_path,
                      const ExecLimits& limits) {
    cfg.validate();
    Translation out;
    if (cfg.shots > 0 && view.size() > 0) {
        const auto query = gateway.embed_batch({task.question}).front();
        if (cfg.selection == DemoSelection::Random) {
            const auto salt = std::stoull(sha256_hex(task.task_id).substr(0, 15), nullptr, 16);
            out.demos = sample_k(view, query, cfg.shots, cfg.seed ^ salt);
        } else {
            out.demos = top_k(view, query, cfg.shots);
        }
    }
    out.linked = cfg.schema_linking ? link_schema(out.demos, catalog, cfg.fallback_full_schema) : SchemaSubset::everything();
    out.prompt = build_prompt(task, out.linked, out.demos, catalog);

    std::vector<std::optional<std::string>> extracted(cfg.paths);
    parallel_for(cfg.paths, cfg.workers, [&](std::size_t i) {
        ChatRequest req;
        req.messages = coder_messages(out.prompt);
        req.temperature = cfg.temperature;
        req.seed = cfg.seed + i;
        req.purpose = "coder";
        extracted[i] = sql::extract_from_completion(gateway.chat(std::move(req)).text);
    });
    out.paths.task_id = task.task_id;
    for (std::size_t i = 0; i < extracted.size(); ++i) {
        if (extracted[i]) out.paths.candidates.push_back({*extracted[i], "coder-path-" + std::to_string(i)});
        else spdlog::warn("task {}: path {} produced no SQL", task.task_id, i);
    }
    if (out.paths.candidates.empty()) throw TranslateError("no path produced SQL for task " + task.task_id);

    out.partition = cluster_candidates(out.paths, db_path, limits, cfg.workers);
    try {
        out.sql = out.paths.candidates[vote(out.partition)].sql;
    } catch (const NoValidResult&) {
        out.sql = out.paths.candidates.front().sql;
    }
    return out;
}

}  // namespace orange
