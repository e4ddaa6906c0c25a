#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orange {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Collapses every whitespace run to one space and trims.
std::string collapse_whitespace(std::string_view s);

namespace sql {

enum class TokenKind {
    Word,            // bare identifier or keyword
    QuotedIdent,     // "x", `x`, [x]
    String,          // 'x'
    Number,
    Punct,           // operators and punctuation
    Parameter,       // ?, ?1, :name, @name, $name
};

struct Token {
    TokenKind kind;
    std::string text;   // source spelling, quotes included
    std::string value;  // identifier with quotes removed; same as text otherwise
    std::size_t offset = 0;

    bool is_word(std::string_view upper_keyword) const;
    bool is_punct(std::string_view p) const { return kind == TokenKind::Punct && text == p; }
    bool is_identifier() const { return kind == TokenKind::Word || kind == TokenKind::QuotedIdent; }
};

/// Splits SQLite-dialect text into tokens, skipping comments.
/// Throws ExtractError on unterminated strings, quoted identifiers or block comments.
std::vector<Token> tokenize(std::string_view sql);

/// True for words that only ever act as syntax in a SELECT statement.
bool is_reserved(std::string_view word);

/// Index of the bracket matching the '(' at `open`; throws ExtractError if unbalanced.
std::size_t matching_paren(const std::vector<Token>& toks, std::size_t open);

/// Canonical text used for equality of SQL strings: tokens joined by one space,
/// bare words lowercased, literals verbatim, trailing semicolons dropped.
/// Falls back to whitespace collapsing when the text does not tokenize.
std::string normalize(std::string_view sql);

/// Pulls one SQL statement out of a chatty model completion: the last fenced
/// code block, else the longest run starting with SELECT or WITH.
std::optional<std::string> extract_from_completion(std::string_view completion);

/// Top-level clauses of a plain (non-compound) SELECT, as source substrings.
struct SelectClauses {
    std::string select_list;
    bool distinct = false;
    std::string from;
    std::string where;
    std::string group_by;
    std::string having;
    std::string order_by;
    std::string limit;
};

/// Returns nullopt for compound selects, CTEs, or text that does not tokenize.
std::optional<SelectClauses> split_select(std::string_view sql);

}  // namespace sql
}  // namespace orange
