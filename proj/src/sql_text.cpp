#include "orange/sql_text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "orange/errors.hpp"

namespace orange {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

namespace sql {

bool Token::is_word(std::string_view upper_keyword) const {
    return kind == TokenKind::Word && iequals(text, upper_keyword);
}

namespace {

bool word_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

bool contains_word(const std::string& text, std::string_view word) {
    for (auto at = text.find(word); at != std::string::npos; at = text.find(word, at + 1)) {
        const bool left = at == 0 || !word_char(static_cast<unsigned char>(text[at - 1]));
        const auto after = at + word.size();
        if (left && (after == text.size() || !word_char(static_cast<unsigned char>(text[after])))) return true;
    }
    return false;
}

// Reads a quoted run starting at `i` (which holds the opening quote) and
// returns the index one past the closing quote. Doubled closers are escapes.
std::size_t scan_quoted(std::string_view s, std::size_t i, char close, std::string& value) {
    std::size_t j = i + 1;
    while (j < s.size()) {
        if (s[j] == close) {
            if (close != ']' && j + 1 < s.size() && s[j + 1] == close) {
                value.push_back(close);
                j += 2;
                continue;
            }
            return j + 1;
        }
        value.push_back(s[j]);
        ++j;
    }
    throw ExtractError("unterminated quoted token at offset " + std::to_string(i));
}

constexpr std::array<std::string_view, 10> kMultiPunct = {"->>", "||", "<=", ">=", "<>",
                                                          "!=",  "==", "<<", ">>", "->"};

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = s[i];
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
            while (i < s.size() && s[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            const auto end = s.find("*/", i + 2);
            if (end == std::string_view::npos)
                throw ExtractError("unterminated block comment at offset " + std::to_string(i));
            i = end + 2;
            continue;
        }
        Token tok{TokenKind::Punct, {}, {}, i};
        std::size_t j = i;
        if (c == '\'') {
            tok.kind = TokenKind::String;
            j = scan_quoted(s, i, '\'', tok.value);
        } else if (c == '"' || c == '`' || c == '[') {
            tok.kind = TokenKind::QuotedIdent;
            j = scan_quoted(s, i, c == '[' ? ']' : static_cast<char>(c), tok.value);
        } else if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            tok.kind = TokenKind::Number;
            if (c == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
                j = i + 2;
                while (j < s.size() && std::isxdigit(static_cast<unsigned char>(s[j]))) ++j;
            } else {
                while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
                if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                    if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                        j = k;
                        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                    }
                }
            }
        } else if (word_start(c)) {
            tok.kind = TokenKind::Word;
            while (j < s.size() && word_char(static_cast<unsigned char>(s[j]))) ++j;
        } else if (c == '?' || c == ':' || c == '@' || c == '$') {
            tok.kind = TokenKind::Parameter;
            j = i + 1;
            while (j < s.size() && word_char(static_cast<unsigned char>(s[j]))) ++j;
        } else {
            bool matched = false;
            for (auto p : kMultiPunct) {
                if (s.substr(i, p.size()) == p) {
                    j = i + p.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                static constexpr std::string_view kSingle = "(),.;+-*/%=<>&|~";
                if (kSingle.find(static_cast<char>(c)) == std::string_view::npos)
                    throw ExtractError(std::string("unexpected character '") + static_cast<char>(c) +
                                       "' at offset " + std::to_string(i));
                j = i + 1;
            }
        }
        tok.text = std::string(s.substr(i, j - i));
        if (tok.kind != TokenKind::String && tok.kind != TokenKind::QuotedIdent) tok.value = tok.text;
        out.push_back(std::move(tok));
        i = j;
    }
    return out;
}

bool is_reserved(std::string_view word) {
    static constexpr std::string_view kReserved[] = {
        "ALL",     "AND",      "AS",        "ASC",     "BETWEEN",   "BY",        "CASE",
        "CAST",    "COLLATE",  "CROSS",     "CURRENT_DATE", "CURRENT_TIME", "CURRENT_TIMESTAMP",
        "DESC",    "DISTINCT", "ELSE",      "END",     "ESCAPE",    "EXCEPT",    "EXISTS",
        "FALSE",   "FROM",     "FULL",      "GLOB",    "GROUP",     "HAVING",    "IN",
        "INDEXED", "INNER",    "INTERSECT", "IS",      "ISNULL",    "JOIN",      "LEFT",
        "LIKE",    "LIMIT",    "MATCH",     "NATURAL", "NOT",       "NOTNULL",   "NULL",
        "NULLS",   "OFFSET",   "ON",        "OR",      "ORDER",     "OUTER",     "OVER",
        "PARTITION", "RECURSIVE", "REGEXP", "RIGHT",   "SELECT",    "THEN",      "TRUE",
        "UNION",   "USING",    "VALUES",    "WHEN",    "WHERE",     "WINDOW",    "WITH",
        "UNBOUNDED", "PRECEDING", "FOLLOWING"};
    return std::any_of(std::begin(kReserved), std::end(kReserved),
                       [&](std::string_view k) { return iequals(k, word); });
}

std::size_t matching_paren(const std::vector<Token>& toks, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < toks.size(); ++i) {
        if (toks[i].is_punct("(")) ++depth;
        else if (toks[i].is_punct(")")) {
            if (--depth == 0) return i;
        }
    }
    throw ExtractError("unbalanced parenthesis");
}

std::string normalize(std::string_view text) {
    std::vector<Token> toks;
    try {
        toks = tokenize(text);
    } catch (const ExtractError&) {
        return collapse_whitespace(text);
    }
    while (!toks.empty() && toks.back().is_punct(";")) toks.pop_back();
    std::string out;
    for (const auto& t : toks) {
        if (!out.empty()) out.push_back(' ');
        out += t.kind == TokenKind::Word ? to_lower(t.text) : t.text;
    }
    return out;
}

namespace {

std::string strip_statement(std::string_view s) {
    std::string out = trim(s);
    while (!out.empty() && (out.back() == ';' || std::isspace(static_cast<unsigned char>(out.back()))))
        out.pop_back();
    return out;
}

}  // namespace

std::optional<std::string> extract_from_completion(std::string_view completion) {
    std::optional<std::string> last_block;
    std::string current;
    bool inside = false;
    std::size_t pos = 0;
    while (pos <= completion.size()) {
        auto nl = completion.find('\n', pos);
        if (nl == std::string_view::npos) nl = completion.size();
        std::string_view line = completion.substr(pos, nl - pos);
        const std::string t = trim(line);
        if (t.rfind("```", 0) == 0) {
            if (inside) {
                auto stmt = strip_statement(current);
                if (!stmt.empty()) last_block = std::move(stmt);
                current.clear();
            }
            inside = !inside;
        } else if (inside) {
            current.append(line);
            current.push_back('\n');
        }
        pos = nl + 1;
    }
    if (last_block) return last_block;

    std::string best;
    const std::string lower = to_lower(completion);
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const bool boundary = i == 0 || !word_char(static_cast<unsigned char>(lower[i - 1]));
        if (!boundary) continue;
        const bool starts = (lower.compare(i, 6, "select") == 0 && (i + 6 == lower.size() || !word_char(static_cast<unsigned char>(lower[i + 6])))) ||
                            (lower.compare(i, 4, "with") == 0 && (i + 4 == lower.size() || !word_char(static_cast<unsigned char>(lower[i + 4]))));
        if (!starts) continue;
        std::size_t end = completion.size();
        const auto semi = completion.find(';', i);
        const auto para = completion.find("\n\n", i);
        end = std::min({end, semi, para});
        auto stmt = strip_statement(completion.substr(i, end - i));
        if (lower[i] == 'w' && !contains_word(to_lower(stmt), "select")) continue;  // "with" in prose
        if (stmt.size() > best.size()) best = std::move(stmt);
    }
    if (best.empty()) return std::nullopt;
    return best;
}

std::optional<SelectClauses> split_select(std::string_view text) {
    std::vector<Token> toks;
    try {
        toks = tokenize(text);
    } catch (const ExtractError&) {
        return std::nullopt;
    }
    while (!toks.empty() && toks.back().is_punct(";")) toks.pop_back();
    if (toks.empty() || !toks[0].is_word("SELECT")) return std::nullopt;

    enum class Part { Select, From, Where, Group, Having, Order, Limit };
    struct Mark {
        Part part;
        std::size_t content_begin;  // byte offset
        std::size_t keyword_begin;
    };
    std::vector<Mark> marks;
    SelectClauses out;
    std::size_t first = 1;
    if (toks.size() > 1 && toks[1].is_word("DISTINCT")) {
        out.distinct = true;
        first = 2;
    } else if (toks.size() > 1 && toks[1].is_word("ALL")) {
        first = 2;
    }
    marks.push_back({Part::Select, first < toks.size() ? toks[first].offset : text.size(), 0});

    int depth = 0;
    for (std::size_t i = first; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.is_punct("(")) ++depth;
        else if (t.is_punct(")")) --depth;
        if (depth != 0 || t.kind != TokenKind::Word) continue;
        if (t.is_word("UNION") || t.is_word("INTERSECT") || t.is_word("EXCEPT") || t.is_word("WINDOW"))
            return std::nullopt;
        auto content_after = [&](std::size_t k) {
            return k + 1 < toks.size() ? toks[k + 1].offset : text.size();
        };
        if (t.is_word("FROM")) marks.push_back({Part::From, content_after(i), t.offset});
        else if (t.is_word("WHERE")) marks.push_back({Part::Where, content_after(i), t.offset});
        else if (t.is_word("HAVING")) marks.push_back({Part::Having, content_after(i), t.offset});
        else if (t.is_word("LIMIT")) marks.push_back({Part::Limit, content_after(i), t.offset});
        else if ((t.is_word("GROUP") || t.is_word("ORDER")) && i + 1 < toks.size() && toks[i + 1].is_word("BY")) {
            marks.push_back({t.is_word("GROUP") ? Part::Group : Part::Order, content_after(i + 1), t.offset});
            ++i;
        }
    }
    const std::size_t end = toks.back().offset + toks.back().text.size();
    for (std::size_t m = 0; m < marks.size(); ++m) {
        const std::size_t stop = m + 1 < marks.size() ? marks[m + 1].keyword_begin : end;
        std::string body = stop > marks[m].content_begin
                               ? trim(text.substr(marks[m].content_begin, stop - marks[m].content_begin))
                               : std::string{};
        switch (marks[m].part) {
            case Part::Select: out.select_list = std::move(body); break;
            case Part::From: out.from = std::move(body); break;
            case Part::Where: out.where = std::move(body); break;
            case Part::Group: out.group_by = std::move(body); break;
            case Part::Having: out.having = std::move(body); break;
            case Part::Order: out.order_by = std::move(body); break;
            case Part::Limit: out.limit = std::move(body); break;
        }
    }
    return out;
}

}  // namespace sql
}  // namespace orange
