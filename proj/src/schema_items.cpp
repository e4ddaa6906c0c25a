#include "orange/schema_items.hpp"

#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "orange/errors.hpp"
#include "orange/sql_text.hpp"

namespace orange {
namespace {

using sql::Token;
using sql::TokenKind;

struct Source {
    std::string alias;              // case-folded visible name
    const SchemaItem* table = nullptr;  // null for derived tables and CTEs
};

struct Scope {
    std::vector<Source> sources;
    const Scope* parent = nullptr;

    bool has_derived() const {
        for (const auto& s : sources)
            if (!s.table) return true;
        return false;
    }
};

bool is_join_word(const Token& t) {
    static constexpr std::string_view kJoin[] = {"NATURAL", "LEFT", "RIGHT", "FULL", "INNER", "CROSS", "OUTER", "JOIN"};
    for (auto k : kJoin)
        if (t.is_word(k)) return true;
    return false;
}

bool starts_query(const Token& t) { return t.is_word("SELECT") || t.is_word("WITH") || t.is_word("VALUES"); }

class Extractor {
public:
    Extractor(const std::vector<Token>& toks, const SchemaCatalog& catalog) : t_(toks), catalog_(catalog) {}

    SchemaSubset run() {
        parse_query(0, t_.size(), nullptr, {});
        return std::move(out_);
    }

private:
    const std::vector<Token>& t_;
    const SchemaCatalog& catalog_;
    SchemaSubset out_;

    bool at(std::size_t i, std::size_t e) const { return i < e; }

    void add_table(const SchemaItem& table) { out_.ids.insert(table.key()); }

    void add_column(const SchemaItem& table, std::string_view column) {
        if (const auto* col = catalog_.find_column(table.id, column)) {
            out_.ids.insert(col->key());
            out_.ids.insert(table.key());
        }
    }

    void add_all_columns(const SchemaItem& table) {
        add_table(table);
        for (const auto* col : catalog_.columns_of(table.id)) out_.ids.insert(col->key());
    }

    void parse_query(std::size_t b, std::size_t e, const Scope* parent, std::set<std::string> ctes) {
        if (b >= e) return;
        if (t_[b].is_punct("(") && sql::matching_paren(t_, b) == e - 1) {
            parse_query(b + 1, e - 1, parent, std::move(ctes));
            return;
        }
        std::size_t i = b;
        if (t_[i].is_word("WITH")) {
            ++i;
            if (at(i, e) && t_[i].is_word("RECURSIVE")) ++i;
            while (at(i, e) && t_[i].is_identifier()) {
                ctes.insert(to_lower(t_[i].value));
                ++i;
                if (at(i, e) && t_[i].is_punct("(")) i = sql::matching_paren(t_, i) + 1;
                if (at(i, e) && t_[i].is_word("AS")) ++i;
                if (at(i, e) && t_[i].is_word("NOT")) ++i;
                if (at(i, e) && t_[i].is_word("MATERIALIZED")) ++i;
                if (!at(i, e) || !t_[i].is_punct("(")) throw ExtractError("malformed WITH clause");
                const auto close = sql::matching_paren(t_, i);
                parse_query(i + 1, close, parent, ctes);
                i = close + 1;
                if (at(i, e) && t_[i].is_punct(",")) ++i;
                else break;
            }
        }
        // Split into compound members at depth 0.
        std::size_t core_begin = i;
        int depth = 0;
        for (std::size_t k = i; k < e; ++k) {
            if (t_[k].is_punct("(")) ++depth;
            else if (t_[k].is_punct(")")) --depth;
            if (depth != 0) continue;
            if (t_[k].is_word("UNION") || t_[k].is_word("INTERSECT") || t_[k].is_word("EXCEPT")) {
                parse_core(core_begin, k, parent, ctes);
                core_begin = k + 1;
                if (core_begin < e && t_[core_begin].is_word("ALL")) ++core_begin;
            }
        }
        parse_core(core_begin, e, parent, ctes);
    }

    void parse_core(std::size_t b, std::size_t e, const Scope* parent, const std::set<std::string>& ctes) {
        if (b >= e) return;
        Scope scope{{}, parent};
        if (t_[b].is_punct("(")) {
            const auto close = sql::matching_paren(t_, b);
            parse_query(b + 1, close, parent, ctes);
            walk(close + 1, e, scope, ctes, false);
            return;
        }
        if (t_[b].is_word("VALUES")) {
            walk(b + 1, e, scope, ctes, false);
            return;
        }
        if (!t_[b].is_word("SELECT")) throw ExtractError("expected SELECT near '" + t_[b].text + "'");

        std::size_t from = e;
        std::size_t from_end = e;
        int depth = 0;
        for (std::size_t k = b + 1; k < e; ++k) {
            if (t_[k].is_punct("(")) ++depth;
            else if (t_[k].is_punct(")")) --depth;
            if (depth != 0) continue;
            if (from == e) {
                if (t_[k].is_word("FROM")) from = k;
                else if (t_[k].is_word("WHERE") || t_[k].is_word("GROUP") || t_[k].is_word("HAVING") ||
                         t_[k].is_word("ORDER") || t_[k].is_word("LIMIT") || t_[k].is_word("WINDOW")) {
                    from_end = k;
                    break;
                }
            } else if (t_[k].is_word("WHERE") || t_[k].is_word("GROUP") || t_[k].is_word("HAVING") ||
                       t_[k].is_word("ORDER") || t_[k].is_word("LIMIT") || t_[k].is_word("WINDOW")) {
                from_end = k;
                break;
            }
        }
        const std::size_t list_end = from != e ? from : from_end;

        std::vector<std::pair<std::size_t, std::size_t>> on_ranges;
        if (from != e) parse_from(from + 1, from_end, scope, ctes, on_ranges);
        walk(b + 1, list_end, scope, ctes, true);
        for (auto [ob, oe] : on_ranges) walk(ob, oe, scope, ctes, false);
        walk(from_end, e, scope, ctes, false);
    }

    std::string read_alias(std::size_t& i, std::size_t e) const {
        if (at(i, e) && t_[i].is_word("AS")) {
            ++i;
            if (at(i, e) && t_[i].is_identifier()) return to_lower(t_[i++].value);
            throw ExtractError("expected alias after AS");
        }
        if (at(i, e) && (t_[i].kind == TokenKind::QuotedIdent ||
                         (t_[i].kind == TokenKind::Word && !sql::is_reserved(t_[i].text) && !is_join_word(t_[i]))))
            return to_lower(t_[i++].value);
        return {};
    }

    void parse_from(std::size_t b, std::size_t e, Scope& scope, const std::set<std::string>& ctes,
                    std::vector<std::pair<std::size_t, std::size_t>>& on_ranges) {
        std::size_t i = b;
        while (i < e) {
            const Token& tok = t_[i];
            if (tok.is_punct(",") || is_join_word(tok)) {
                ++i;
                continue;
            }
            if (tok.is_word("ON")) {
                std::size_t k = i + 1;
                int depth = 0;
                for (; k < e; ++k) {
                    if (t_[k].is_punct("(")) ++depth;
                    else if (t_[k].is_punct(")")) --depth;
                    if (depth == 0 && (t_[k].is_punct(",") || is_join_word(t_[k]))) break;
                }
                on_ranges.emplace_back(i + 1, k);
                i = k;
                continue;
            }
            if (tok.is_word("USING")) {
                ++i;
                if (!at(i, e) || !t_[i].is_punct("(")) throw ExtractError("expected ( after USING");
                const auto close = sql::matching_paren(t_, i);
                for (std::size_t k = i + 1; k < close; ++k) {
                    if (!t_[k].is_identifier()) continue;
                    for (const auto& src : scope.sources)
                        if (src.table) add_column(*src.table, t_[k].value);
                }
                i = close + 1;
                continue;
            }
            if (tok.is_punct("(")) {
                const auto close = sql::matching_paren(t_, i);
                if (close > i + 1 && starts_query(t_[i + 1])) {
                    parse_query(i + 1, close, scope.parent, ctes);
                    i = close + 1;
                    scope.sources.push_back({read_alias(i, e), nullptr});
                } else {
                    parse_from(i + 1, close, scope, ctes, on_ranges);
                    i = close + 1;
                    read_alias(i, e);
                }
                continue;
            }
            if (tok.is_identifier()) {
                std::string name = tok.value;
                ++i;
                if (at(i + 1, e) && t_[i].is_punct(".") && t_[i + 1].is_identifier()) {
                    name = t_[i + 1].value;  // schema-qualified
                    i += 2;
                }
                bool table_function = false;
                if (at(i, e) && t_[i].is_punct("(")) {
                    const auto close = sql::matching_paren(t_, i);
                    walk(i + 1, close, scope, ctes, false);
                    i = close + 1;
                    table_function = true;
                }
                std::string alias = read_alias(i, e);
                if (at(i, e) && t_[i].is_word("INDEXED")) i += 3;  // INDEXED BY name
                else if (at(i + 1, e) && t_[i].is_word("NOT") && t_[i + 1].is_word("INDEXED")) i += 2;
                if (alias.empty()) alias = to_lower(name);

                const SchemaItem* table = nullptr;
                if (!table_function && !ctes.count(to_lower(name))) {
                    table = catalog_.find_table(name);
                    if (table) add_table(*table);
                    else spdlog::warn("schema linking: unknown table '{}'", name);
                }
                scope.sources.push_back({std::move(alias), table});
                continue;
            }
            ++i;
        }
    }

    const Source* find_source(std::string_view alias, const Scope& scope) const {
        const std::string key = to_lower(alias);
        for (const Scope* s = &scope; s; s = s->parent)
            for (const auto& src : s->sources)
                if (src.alias == key) return &src;
        return nullptr;
    }

    void resolve_unqualified(std::string_view column, const Scope& scope) {
        for (const Scope* s = &scope; s; s = s->parent) {
            for (const auto& src : s->sources) {
                if (src.table && catalog_.find_column(src.table->id, column)) {
                    add_column(*src.table, column);
                    return;
                }
            }
            if (s->has_derived()) break;
        }
        spdlog::debug("schema linking: '{}' does not name a catalog column", column);
    }

    void walk(std::size_t b, std::size_t e, const Scope& scope, const std::set<std::string>& ctes, bool select_list) {
        std::size_t i = b;
        while (i < e) {
            const Token& tok = t_[i];
            if (tok.is_punct("(")) {
                const auto close = sql::matching_paren(t_, i);
                if (close > i + 1 && starts_query(t_[i + 1])) {
                    parse_query(i + 1, close, &scope, ctes);
                    i = close + 1;
                    continue;
                }
                ++i;
                continue;
            }
            if (tok.is_word("AS") || tok.is_word("COLLATE")) {
                i += 2;
                continue;
            }
            if (tok.is_punct("*")) {
                const bool star_item = select_list && (i == b || t_[i - 1].is_punct(",") ||
                                                       t_[i - 1].is_word("DISTINCT") || t_[i - 1].is_word("ALL"));
                if (star_item)
                    for (const auto& src : scope.sources)
                        if (src.table) add_all_columns(*src.table);
                ++i;
                continue;
            }
            const bool ident = tok.kind == TokenKind::QuotedIdent ||
                               (tok.kind == TokenKind::Word && !sql::is_reserved(tok.text));
            if (!ident) {
                ++i;
                continue;
            }
            if (tok.kind == TokenKind::Word && at(i + 1, e) && t_[i + 1].is_punct("(")) {
                ++i;  // function name
                continue;
            }
            // Dotted chain: a, a.b, a.b.c, a.*
            std::vector<const Token*> parts{&tok};
            std::size_t k = i + 1;
            while (at(k + 1, e) && t_[k].is_punct(".") && (t_[k + 1].is_identifier() || t_[k + 1].is_punct("*"))) {
                parts.push_back(&t_[k + 1]);
                k += 2;
            }
            i = k;
            if (parts.size() == 1) {
                resolve_unqualified(tok.value, scope);
                continue;
            }
            const Token& last = *parts.back();
            const Token& qualifier = *parts[parts.size() - 2];
            const Source* src = find_source(qualifier.value, scope);
            if (!src) {
                spdlog::warn("schema linking: unknown qualifier '{}'", qualifier.value);
                continue;
            }
            if (!src->table) continue;
            if (last.is_punct("*")) add_all_columns(*src->table);
            else add_column(*src->table, last.value);
        }
    }
};

}  // namespace

SchemaSubset extract_schema_items(std::string_view text, const SchemaCatalog& catalog) {
    auto toks = sql::tokenize(text);
    while (!toks.empty() && toks.back().is_punct(";")) toks.pop_back();
    if (toks.empty()) throw ExtractError("empty statement");
    int depth = 0;
    for (const auto& tok : toks) {
        if (tok.is_punct("(")) ++depth;
        else if (tok.is_punct(")") && --depth < 0) throw ExtractError("unbalanced parenthesis");
        else if (tok.is_punct(";")) throw ExtractError("multiple statements");
    }
    if (depth != 0) throw ExtractError("unbalanced parenthesis");
    if (!starts_query(toks.front()) && !toks.front().is_punct("("))
        throw ExtractError("not a query: starts with '" + toks.front().text + "'");
    return Extractor(toks, catalog).run();
}

}  // namespace orange
