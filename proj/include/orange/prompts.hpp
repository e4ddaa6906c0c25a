#pragma once

#include <string_view>

// Prompt templates. Bump kPromptVersion whenever wording changes; it is written
// to config.json and cassettes are keyed by prompt content.
namespace orange::prompts {

inline constexpr std::string_view kPromptVersion = "orange-prompts-v1";

inline constexpr std::string_view kParserSystem =
    "You annotate SQL queries for a text-to-SQL knowledge base.\n"
    "You decompose a query least-to-most into executable sub-queries and explain each one.\n"
    "Always answer with fenced ```step blocks. A block holds labelled fields, one label per line:\n"
    "SUB_SQL: an executable SQLite query\n"
    "REASONING: what one tuple represents after each operation, step by step\n"
    "QUESTION: the natural-language question the sub-query answers\n"
    "Text outside the blocks is ignored.";

inline constexpr std::string_view kPlanInstruction =
    "Decompose the candidate SQL into sub-SQL queries ordered from the simplest building block "
    "to the full query. Every sub-SQL must run on its own and extend the previous one; the last "
    "one is the full query. Emit one ```step block per sub-SQL containing only the SUB_SQL field.";

inline constexpr std::string_view kAnnotateInstruction =
    "Track the tuple semantics: say what one tuple represents after each operation (FROM, JOIN, "
    "WHERE, GROUP BY, aggregation, ORDER BY/LIMIT) and how that changes what COUNT, SUM or AVG "
    "measure. Then write the question this sub-SQL answers. Reply with one ```step block holding "
    "REASONING first and QUESTION second.";

inline constexpr std::string_view kRetryInstruction =
    "Your previous reply did not contain a well-formed ```step block with the required fields. "
    "Answer again using exactly the requested format.";

inline constexpr std::string_view kCandidateHeader = "Candidate SQL:";
inline constexpr std::string_view kAnnotateHeader = "Sub-SQL to annotate:";

inline constexpr std::string_view kCoderSystem =
    "You are a SQLite expert. You write one correct SQLite query that answers the user's question.";

inline constexpr std::string_view kCoderInstruction =
    "Translate the question into a SQLite query over the schema below. The demonstrations are "
    "verified question/SQL pairs from this same database; reuse their tables, columns, join paths "
    "and value spellings.";

inline constexpr std::string_view kSchemaSection = "### Database schema";
inline constexpr std::string_view kDemoSection = "### Demonstrations";
inline constexpr std::string_view kEvidenceSection = "### Evidence";
inline constexpr std::string_view kQuestionSection = "### Question";
inline constexpr std::string_view kFormatSection = "### Output format";
inline constexpr std::string_view kFormatDirective =
    "Return exactly one SQLite query inside a single ```sql fenced code block.";

}  // namespace orange::prompts
