#include "orange/mock_responder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "orange/errors.hpp"
#include "orange/prompts.hpp"
#include "orange/sql_text.hpp"

namespace orange {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void add_direction(Embedding& v, std::string_view token, std::uint64_t seed, double weight) {
    std::uint64_t state = fnv1a(token, seed);
    for (double& x : v) {
        const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;  // [0,1)
        x += weight * (2.0 * u - 1.0);
    }
}

bool is_stopword(std::string_view w) {
    static const std::set<std::string, std::less<>> kStop = {
        "a", "an", "the", "of", "in", "on", "at", "to", "for", "by", "with", "and", "or",
        "is", "are", "was", "were", "be", "that", "which", "this", "these", "those", "it",
        "its", "as", "from", "into", "there", "their", "do", "does", "did"};
    return kStop.count(w) > 0;
}

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (cur.size() > 3 && cur.back() == 's' && cur[cur.size() - 2] != 's') cur.pop_back();
        if (!is_stopword(cur)) out.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) cur.push_back(static_cast<char>(std::tolower(c)));
        else flush();
    }
    flush();
    return out;
}

}  // namespace

Embedding hash_embedding(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
    Embedding v(dim, 0.0);
    for (const auto& w : words(text)) add_direction(v, w, seed, 1.0);
    add_direction(v, text, seed ^ 0x5bd1e995ull, 0.1);
    normalize_l2(v);
    return v;
}

// ---------------------------------------------------------------------------
// Template descriptions

namespace mock {
namespace {

struct Parsed {
    sql::SelectClauses clauses;
    std::vector<std::string> tables;
};

// Tokens re-joined without alias qualifiers ("T1.element" -> "element").
std::string unqualified(std::string_view text) {
    std::vector<sql::Token> toks;
    try {
        toks = sql::tokenize(text);
    } catch (const ExtractError&) {
        return collapse_whitespace(text);
    }
    std::string out;
    bool prev_word = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].is_identifier() && i + 1 < toks.size() && toks[i + 1].is_punct(".")) {
            ++i;
            continue;
        }
        const auto& t = toks[i];
        const bool glued = t.is_punct(",") || t.is_punct(")") || (t.is_punct("(") && prev_word);
        if (!out.empty() && !glued && out.back() != '(') out.push_back(' ');
        out += t.kind == sql::TokenKind::QuotedIdent ? t.value : t.text;
        prev_word = t.kind == sql::TokenKind::Word;
    }
    return out;
}

std::vector<std::string> from_tables(std::string_view from) {
    std::vector<std::string> out;
    std::vector<sql::Token> toks;
    try {
        toks = sql::tokenize(from);
    } catch (const ExtractError&) {
        return out;
    }
    bool expect_table = true;
    int depth = 0;
    for (const auto& t : toks) {
        if (t.is_punct("(")) ++depth;
        else if (t.is_punct(")")) --depth;
        if (depth != 0) continue;
        if (t.is_word("JOIN") || t.is_punct(",")) {
            expect_table = true;
            continue;
        }
        if (expect_table && t.is_identifier() && !sql::is_reserved(t.text)) {
            out.push_back(t.value);
            expect_table = false;
        }
    }
    return out;
}

std::optional<Parsed> parse(std::string_view text) {
    auto clauses = sql::split_select(text);
    if (!clauses || clauses->from.empty()) return std::nullopt;
    Parsed p{*clauses, from_tables(clauses->from)};
    if (p.tables.empty()) return std::nullopt;
    return p;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += i + 1 == names.size() ? " and " : ", ";
        out += names[i];
    }
    return out;
}

}  // namespace

std::vector<std::string> plan_steps(std::string_view text) {
    const std::string full = trim(text);
    auto p = parse(text);
    if (!p) return {full};
    const auto& c = p->clauses;
    const bool projected = c.select_list != "*" || c.distinct;
    const bool shaped = projected || !c.group_by.empty() || !c.order_by.empty() || !c.limit.empty();
    std::vector<std::string> steps;
    if (p->tables.size() > 1 && (shaped || !c.where.empty())) steps.push_back("SELECT * FROM " + c.from);
    if (!c.where.empty() && shaped) steps.push_back("SELECT * FROM " + c.from + " WHERE " + c.where);
    steps.push_back(full);
    return steps;
}

Annotation describe(std::string_view text) {
    auto p = parse(text);
    if (!p) {
        return {"Each tuple is one row produced by the query; the operations are applied in order.",
                "What does the query " + collapse_whitespace(text) + " return?"};
    }
    const auto& c = p->clauses;
    const auto& base = p->tables.front();
    std::vector<std::string> others(p->tables.begin() + 1, p->tables.end());

    std::string reasoning = "Each tuple of " + base + " represents one " + base + " record.";
    for (const auto& t : others)
        reasoning += " After joining " + t + ", each tuple represents one " + base +
                     " record together with its matching " + t + " record.";
    const std::string cond = unqualified(c.where);
    if (!c.where.empty()) reasoning += " The WHERE clause keeps only the tuples where " + cond + ".";
    const std::string group = unqualified(c.group_by);
    if (!c.group_by.empty())
        reasoning += " GROUP BY " + group + " turns the tuples into one group per " + group + " value.";

    const std::string select = unqualified(c.select_list);
    const std::string upper = [&] {
        std::string u = select;
        std::transform(u.begin(), u.end(), u.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        return u;
    }();
    std::string lead;
    std::string scope = base;
    if (!others.empty()) scope += " joined with " + join_names(others);
    auto inner = [&] {
        const auto open = select.find('(');
        const auto close = select.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close <= open) return select;
        return trim(select.substr(open + 1, close - open - 1));
    };
    if (upper.rfind("COUNT(", 0) == 0) {
        const std::string what = inner();
        if (what.rfind("DISTINCT", 0) == 0 || what.rfind("distinct", 0) == 0) {
            reasoning += " COUNT(" + what + ") counts distinct values, so each entity is counted once even if it appears in several tuples.";
            lead = "How many distinct " + trim(what.substr(8)) + " values are there in " + scope;
        } else {
            reasoning += " COUNT counts the remaining tuples, so it measures " + base + " records" +
                         (others.empty() ? std::string{} : " rather than distinct " + others.front() + " records") + ".";
            lead = "How many " + base + " records are there in " + scope;
        }
    } else if (upper.rfind("AVG(", 0) == 0 || upper.rfind("SUM(", 0) == 0 || upper.rfind("MAX(", 0) == 0 ||
               upper.rfind("MIN(", 0) == 0) {
        static const std::pair<std::string_view, std::string_view> kNames[] = {
            {"AVG(", "average"}, {"SUM(", "total"}, {"MAX(", "maximum"}, {"MIN(", "minimum"}};
        std::string_view name = "value";
        for (auto [prefix, word] : kNames)
            if (upper.rfind(std::string(prefix), 0) == 0) name = word;
        reasoning += " The aggregate computes the " + std::string(name) + " of " + inner() + " over the remaining tuples.";
        lead = "What is the " + std::string(name) + " " + inner() + " of " + scope;
    } else if (select == "*") {
        lead = "List all " + base + " records in " + scope;
    } else {
        reasoning += " The SELECT list projects " + select + " from each tuple.";
        lead = std::string(c.distinct ? "What are the distinct " : "What are the ") + select + " of " + scope;
    }
    std::string question = lead;
    if (!c.where.empty()) question += " where " + cond;
    if (!c.group_by.empty()) question += " for each " + group;
    if (!c.order_by.empty()) question += " ordered by " + unqualified(c.order_by);
    if (!c.limit.empty()) question += " limited to " + unqualified(c.limit);
    question += "?";
    return {reasoning, question};
}

}  // namespace mock

// ---------------------------------------------------------------------------
// Backend

namespace {

std::optional<std::string> fenced_sql_after(std::string_view text, std::string_view header) {
    const auto h = text.find(header);
    if (h == std::string_view::npos) return std::nullopt;
    const auto open = text.find("```", h);
    if (open == std::string_view::npos) return std::nullopt;
    const auto body = text.find('\n', open);
    const auto close = text.find("```", body == std::string_view::npos ? open + 3 : body);
    if (body == std::string_view::npos || close == std::string_view::npos) return std::nullopt;
    return trim(text.substr(body + 1, close - body - 1));
}

std::optional<std::string> find_in_user_messages(const ChatRequest& req, std::string_view header) {
    for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
        if (it->role != "user") continue;
        if (auto sql = fenced_sql_after(it->content, header)) return sql;
    }
    return std::nullopt;
}

std::string plan_reply(const std::string& candidate) {
    std::string out = "Breaking the query into building blocks.\n";
    for (const auto& step : mock::plan_steps(candidate)) out += "```step\nSUB_SQL: " + step + "\n```\n";
    return out;
}

std::string annotate_reply(const std::string& sub_sql) {
    const auto a = mock::describe(sub_sql);
    return "```step\nREASONING: " + a.reasoning + "\nQUESTION: " + a.question + "\n```\n";
}

std::string coder_reply(const std::string& prompt, std::uint64_t h) {
    std::vector<std::string> demos;
    std::vector<std::string> tables;
    bool in_demos = false;
    std::size_t pos = 0;
    while (pos < prompt.size()) {
        auto nl = prompt.find('\n', pos);
        if (nl == std::string::npos) nl = prompt.size();
        const std::string_view line(prompt.data() + pos, nl - pos);
        if (line.rfind("### ", 0) == 0) in_demos = line == prompts::kDemoSection;
        if (in_demos && line.rfind("SQL: ", 0) == 0) demos.emplace_back(line.substr(5));
        if (line.rfind("CREATE TABLE ", 0) == 0) {
            auto name = line.substr(13);
            tables.emplace_back(name.substr(0, name.find(' ')));
        }
        pos = nl + 1;
    }
    std::string sql;
    if (!demos.empty()) {
        // Most similar demonstrations sit last in the prompt.
        const auto r = h % 100;
        const std::size_t back = r < 60 ? 0 : (r < 85 ? 1 : 2);
        sql = demos[demos.size() - 1 - std::min(back, demos.size() - 1)];
    } else if (!tables.empty()) {
        sql = "SELECT COUNT(*) FROM " + tables[h % tables.size()];
    } else {
        sql = "SELECT 1";
    }
    return "Based on the schema and examples:\n```sql\n" + sql + "\n```\n";
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
    if (dim_ == 0) throw ConfigError("mock embedding dimension must be positive");
}

std::vector<ScriptRule> MockBackend::load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read mock script " + path.string());
    try {
        const auto doc = nlohmann::json::parse(in);
        std::vector<ScriptRule> rules;
        for (const auto& r : doc)
            rules.push_back({r.value("purpose", ""), r.at("contains").get<std::string>(),
                             r.at("response").get<std::string>()});
        return rules;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed mock script " + path.string() + ": " + e.what());
    }
}

std::string MockBackend::embed_model() const { return "mock-hash-" + std::to_string(dim_); }

ChatResponse MockBackend::chat(const ChatRequest& req) {
    req.validate();
    const std::string& last = req.messages.back().content;
    for (const auto& rule : rules_) {
        if (!rule.purpose.empty() && rule.purpose != req.purpose) continue;
        if (last.find(rule.contains) != std::string::npos) return {rule.response, 0, 0};
    }
    const std::uint64_t h = fnv1a(normalize_for_digest(last), seed_ ^ (req.seed.value_or(0) * 0x9E3779B97F4A7C15ull));
    ChatResponse out;
    if (req.purpose == "parser.plan") {
        auto cand = find_in_user_messages(req, prompts::kCandidateHeader);
        out.text = cand ? plan_reply(*cand) : "I could not find a query to decompose.";
    } else if (req.purpose == "parser.annotate") {
        auto sub = find_in_user_messages(req, prompts::kAnnotateHeader);
        out.text = sub ? annotate_reply(*sub) : "I could not find a query to annotate.";
    } else if (req.purpose == "coder" || req.purpose == "zeroshot") {
        out.text = coder_reply(last, h);
    } else {
        out.text = "OK";
    }
    out.prompt_tokens = 0;
    for (const auto& m : req.messages) out.prompt_tokens += m.content.size() / 4;
    out.completion_tokens = out.text.size() / 4;
    return out;
}

std::vector<Embedding> MockBackend::embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embedding(t, dim_, seed_));
    return out;
}

}  // namespace orange
