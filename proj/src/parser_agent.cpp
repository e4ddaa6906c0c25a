#include "orange/parser_agent.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "orange/errors.hpp"
#include "orange/prompts.hpp"
#include "orange/sql_text.hpp"

namespace orange {
namespace {

enum class Field { None, SubSql, Reasoning, Question };

// Recognises "SUB_SQL:", "Reasoning :", "**QUESTION**:" and similar label lines.
Field label_of(std::string_view line, std::string& rest) {
    std::string head;
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '*' || line[i] == '-')) ++i;
    const auto colon = line.find(':', i);
    if (colon == std::string_view::npos) return Field::None;
    for (char c : line.substr(i, colon - i))
        if (c != '*' && c != ' ') head.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    Field f = Field::None;
    if (head == "SUB_SQL" || head == "SUBSQL" || head == "SUB-SQL") f = Field::SubSql;
    else if (head == "REASONING") f = Field::Reasoning;
    else if (head == "QUESTION") f = Field::Question;
    if (f != Field::None) rest = std::string(line.substr(colon + 1));
    return f;
}

std::optional<PlanEntry> parse_block(std::string_view body) {
    PlanEntry entry;
    Field current = Field::None;
    std::string value;
    bool any = false;
    auto flush = [&] {
        std::string v = trim(value);
        switch (current) {
            case Field::SubSql: entry.sub_sql = v; break;
            case Field::Reasoning: entry.reasoning = v; break;
            case Field::Question: entry.question = v; break;
            case Field::None: break;
        }
        value.clear();
    };
    std::size_t pos = 0;
    while (pos <= body.size()) {
        auto nl = body.find('\n', pos);
        if (nl == std::string_view::npos) nl = body.size();
        const auto line = body.substr(pos, nl - pos);
        std::string rest;
        const Field f = label_of(line, rest);
        if (f != Field::None) {
            flush();
            current = f;
            value = rest;
            any = true;
        } else if (current != Field::None) {
            value += "\n";
            value += line;
        }
        pos = nl + 1;
    }
    flush();
    if (!any) return std::nullopt;
    if (entry.reasoning && entry.reasoning->empty()) entry.reasoning.reset();
    if (entry.question && entry.question->empty()) entry.question.reset();
    return entry;
}

std::string conversation_id(const std::string& candidate, const std::string& evidence) {
    return sha256_hex(sql::normalize(candidate) + "\n" + evidence).substr(0, 12);
}

std::string sql_fence(std::string_view sql) { return "```sql\n" + trim(sql) + "\n```"; }

std::string plan_prompt(const std::string& candidate, const SchemaCatalog& catalog, const std::string& evidence) {
    std::string out(prompts::kPlanInstruction);
    out += "\n\n";
    out += prompts::kSchemaSection;
    out += "\n" + render_schema(catalog, SchemaSubset::everything()) + "\n";
    if (!trim(evidence).empty()) {
        out += prompts::kEvidenceSection;
        out += "\n" + trim(evidence) + "\n\n";
    }
    out += prompts::kCandidateHeader;
    out += "\n" + sql_fence(candidate) + "\n";
    return out;
}

std::string annotate_prompt(const ParseStep& step) {
    std::string out(prompts::kAnnotateInstruction);
    out += "\n\n";
    out += prompts::kAnnotateHeader;
    out += "\n" + sql_fence(step.sub_sql) + "\n";
    out += "Exec_result: " + render_rows(step.exec_preview, kPreviewRows) + "\n";
    return out;
}

// Sends the conversation, retrying with a format reminder until `accept` passes.
template <typename Accept>
std::vector<PlanEntry> ask(std::vector<ChatMessage>& messages, const char* purpose, Gateway& gateway,
                           const ParserConfig& cfg, const std::string& candidate, Accept accept) {
    std::string last_problem;
    for (std::size_t attempt = 0; attempt <= cfg.retries; ++attempt) {
        if (attempt > 0) messages.push_back({"user", std::string(prompts::kRetryInstruction)});
        ChatRequest req;
        req.messages = messages;
        req.temperature = 0.0;
        req.seed = 0;
        req.purpose = purpose;
        const auto resp = gateway.chat(std::move(req));
        messages.push_back({"assistant", resp.text});
        try {
            auto entries = parse_model_plan(resp.text);
            if (accept(entries)) return entries;
            last_problem = "required fields missing";
        } catch (const ParseFormatError& e) {
            last_problem = e.what();
        }
        spdlog::debug("{} reply rejected (attempt {}): {}", purpose, attempt + 1, last_problem);
    }
    throw ParseError(candidate, std::string(purpose) + ": " + last_problem);
}

}  // namespace

std::vector<PlanEntry> parse_model_plan(std::string_view text) {
    std::vector<PlanEntry> out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("```", pos);
        if (open == std::string_view::npos) break;
        const auto body = text.find('\n', open);
        if (body == std::string_view::npos) break;
        const auto close = text.find("```", body);
        if (close == std::string_view::npos) break;
        if (auto entry = parse_block(text.substr(body + 1, close - body - 1))) out.push_back(std::move(*entry));
        pos = close + 3;
    }
    if (out.empty()) throw ParseFormatError("no SUB_SQL/REASONING/QUESTION block in model output");
    return out;
}

ParseTrace decompose(const std::string& candidate, const SchemaCatalog& catalog, const std::string& evidence,
                     Gateway& gateway, const std::filesystem::path& db_path, const ParserConfig& cfg) {
    if (cfg.max_steps == 0) throw ConfigError("max_steps must be positive");
    ParseTrace trace;
    trace.candidate_sql = trim(candidate);
    trace.conversation_id = conversation_id(candidate, evidence);
    auto& messages = trace.transcript;
    messages.push_back({"system", std::string(prompts::kParserSystem)});
    messages.push_back({"user", plan_prompt(trace.candidate_sql, catalog, evidence)});

    const auto plan = ask(messages, "parser.plan", gateway, cfg, trace.candidate_sql, [](const auto& entries) {
        for (const auto& e : entries)
            if (!e.sub_sql.empty()) return true;
        return false;
    });

    std::vector<PlanEntry> steps;
    for (const auto& e : plan)
        if (!e.sub_sql.empty()) steps.push_back(e);
    const std::string full = sql::normalize(trace.candidate_sql);
    if (sql::normalize(steps.back().sub_sql) != full) steps.push_back({trace.candidate_sql, {}, {}});
    if (steps.size() > cfg.max_steps) {
        spdlog::warn("plan for candidate {} has {} steps; keeping the last {}", trace.conversation_id, steps.size(),
                     cfg.max_steps);
        steps.erase(steps.begin(), steps.end() - static_cast<std::ptrdiff_t>(cfg.max_steps));
    }

    for (const auto& entry : steps) {
        const auto outcome = execute(db_path, entry.sub_sql, cfg.limits);
        if (is_error(outcome)) {
            spdlog::warn("dropping sub-SQL that fails to execute ({}): {}", std::get<ExecError>(outcome).message,
                         entry.sub_sql);
            continue;
        }
        ParseStep step;
        step.step_index = trace.steps.size();
        step.sub_sql = entry.sub_sql;
        step.exec_fingerprint = fingerprint(outcome);
        const auto& rows = std::get<ResultTable>(outcome).rows;
        step.exec_preview.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(rows.size(), kPreviewRows)));

        if (entry.reasoning && entry.question) {
            step.reasoning = *entry.reasoning;
            step.question = *entry.question;
        } else {
            messages.push_back({"user", annotate_prompt(step)});
            const auto reply = ask(messages, "parser.annotate", gateway, cfg, trace.candidate_sql, [](const auto& entries) {
                for (const auto& e : entries)
                    if (e.reasoning && e.question) return true;
                return false;
            });
            for (const auto& e : reply) {
                if (e.reasoning && e.question) {
                    step.reasoning = *e.reasoning;
                    step.question = *e.question;
                    break;
                }
            }
        }
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

std::vector<KnowledgeUnit> units_from_trace(const ParseTrace& trace, const TranslationTask& task,
                                            std::size_t candidate_index) {
    std::vector<KnowledgeUnit> out;
    for (const auto& s : trace.steps) {
        KnowledgeUnit u;
        u.db_id = task.db_id;
        u.question = s.question;
        u.sql = s.sub_sql;
        u.reasoning = s.reasoning;
        u.exec_preview = s.exec_preview;
        u.exec_fingerprint = s.exec_fingerprint;
        u.unit_id = make_unit_id(u.db_id, u.sql, u.exec_fingerprint);
        u.provenance = {task.task_id, task.sequence_index, candidate_index, s.step_index};
        out.push_back(std::move(u));
    }
    return out;
}

std::vector<KnowledgeUnit> dedup(const std::vector<KnowledgeUnit>& units) {
    std::vector<KnowledgeUnit> out;
    std::set<std::string> seen;
    for (const auto& u : units) {
        if (u.exec_fingerprint.null_like || u.exec_fingerprint.is_error) continue;
        if (!seen.insert(u.exec_fingerprint.digest).second) continue;
        out.push_back(u);
    }
    return out;
}

}  // namespace orange
