#include "orange/sql_exec.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <openssl/evp.h>

#include "orange/errors.hpp"
#include "orange/sql_text.hpp"
#include "sqlite_handle.hpp"

namespace orange {

std::string_view to_string(ErrorClass c) {
    switch (c) {
        case ErrorClass::None: return "none";
        case ErrorClass::Timeout: return "timeout";
        case ErrorClass::Syntax: return "syntax";
        case ErrorClass::Runtime: return "runtime";
    }
    return "none";
}

ErrorClass error_class_from_string(std::string_view s) {
    if (s == "timeout") return ErrorClass::Timeout;
    if (s == "syntax") return ErrorClass::Syntax;
    if (s == "runtime") return ErrorClass::Runtime;
    return ErrorClass::None;
}

void ExecLimits::validate() const {
    if (!(timeout_seconds > 0)) throw ConfigError("timeout must be positive");
    if (max_rows == 0) throw ConfigError("max_rows must be positive");
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
    Clock::time_point at;
    bool expired = false;
};

int progress_check(void* arg) {
    auto* d = static_cast<Deadline*>(arg);
    if (Clock::now() >= d->at) d->expired = true;
    return d->expired ? 1 : 0;
}

ErrorClass classify_prepare_failure(const std::string& msg) {
    static constexpr std::string_view kSyntaxMarkers[] = {"syntax error", "incomplete input",
                                                          "unrecognized token", "unterminated"};
    for (auto m : kSyntaxMarkers)
        if (msg.find(m) != std::string::npos) return ErrorClass::Syntax;
    return ErrorClass::Runtime;
}

bool only_trivia(std::string_view tail) {
    try {
        for (const auto& t : sql::tokenize(tail))
            if (!t.is_punct(";")) return false;
        return true;
    } catch (const ExtractError&) {
        return false;
    }
}

Value read_value(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT: return sqlite3_column_double(stmt, col);
        case SQLITE_TEXT: {
            const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
            return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
        }
        case SQLITE_BLOB: {
            const auto* p = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt, col));
            const auto n = static_cast<std::size_t>(sqlite3_column_bytes(stmt, col));
            return Blob{std::vector<std::uint8_t>(p, p + n)};
        }
        default: return std::monostate{};
    }
}

}  // namespace

ExecOutcome execute(const std::filesystem::path& db_path, std::string_view sql_text, const ExecLimits& limits) {
    limits.validate();
    detail::Connection conn;
    try {
        conn = detail::Connection::open_read_only(db_path);
    } catch (const Error& e) {
        return ExecError{ErrorClass::Runtime, e.what()};
    }

    Deadline deadline{Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double>(limits.timeout_seconds))};
    sqlite3_progress_handler(conn.get(), 1000, progress_check, &deadline);

    const std::string text(sql_text);
    const char* tail = nullptr;
    auto stmt = conn.prepare(text, &tail);
    if (!stmt) {
        if (deadline.expired) return ExecError{ErrorClass::Timeout, "prepare timed out"};
        const std::string msg = conn.last_error();
        if (msg == "not an error") return ExecError{ErrorClass::Syntax, "empty statement"};
        return ExecError{classify_prepare_failure(msg), msg};
    }
    if (tail && !only_trivia(std::string_view(tail)))
        return ExecError{ErrorClass::Runtime, "multiple statements are not allowed"};
    if (!sqlite3_stmt_readonly(stmt.get()))
        return ExecError{ErrorClass::Runtime, "write statements are not allowed"};

    ResultTable table;
    const int ncols = sqlite3_column_count(stmt.get());
    for (int c = 0; c < ncols; ++c) table.column_names.emplace_back(sqlite3_column_name(stmt.get(), c));

    int rc;
    while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) {
        ++table.row_count_before_truncation;
        if (table.rows.size() >= limits.max_rows) {
            table.truncated = true;
            continue;
        }
        Row row;
        row.reserve(static_cast<std::size_t>(ncols));
        for (int c = 0; c < ncols; ++c) row.push_back(read_value(stmt.get(), c));
        table.rows.push_back(std::move(row));
    }
    if (rc != SQLITE_DONE) {
        if (table.truncated && deadline.expired) return table;  // count is a lower bound
        if (deadline.expired || rc == SQLITE_INTERRUPT)
            return ExecError{ErrorClass::Timeout, "statement exceeded the time limit"};
        return ExecError{ErrorClass::Runtime, conn.last_error()};
    }
    return table;
}

std::string canonical_value(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return "N"; }
        std::string operator()(std::int64_t i) const { return "I" + std::to_string(i); }
        std::string operator()(double d) const {
            if (std::isnan(d)) return "Rnan";
            if (std::isinf(d)) return d > 0 ? "Rinf" : "R-inf";
            double r = std::round(d * 1e6) / 1e6;
            if (r == 0) r = 0;  // folds -0
            if (std::abs(r) < 9007199254740992.0 && r == std::floor(r))
                return "I" + std::to_string(static_cast<std::int64_t>(r));
            char buf[64];
            std::snprintf(buf, sizeof buf, "R%.6f", r);
            return buf;
        }
        std::string operator()(const std::string& s) const { return "T" + std::to_string(s.size()) + ":" + s; }
        std::string operator()(const Blob& b) const {
            static constexpr char kHex[] = "0123456789abcdef";
            std::string out = "B" + std::to_string(b.bytes.size()) + ":";
            for (auto byte : b.bytes) {
                out.push_back(kHex[byte >> 4]);
                out.push_back(kHex[byte & 0xF]);
            }
            return out;
        }
    };
    return std::visit(Visitor{}, v);
}

std::vector<std::string> canonical_rows(const ResultTable& t) {
    std::vector<std::string> rows;
    rows.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        std::string enc;
        for (const auto& v : row) {
            enc += canonical_value(v);
            enc.push_back('|');
        }
        rows.push_back(std::move(enc));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::string canonical_encoding(const ExecOutcome& o) {
    if (const auto* err = std::get_if<ExecError>(&o)) {
        const auto cls = err->error_class == ErrorClass::None ? ErrorClass::Runtime : err->error_class;
        return "error:" + std::string(to_string(cls));
    }
    const auto& t = std::get<ResultTable>(o);
    const auto rows = canonical_rows(t);
    std::string out = "rows:" + std::to_string(rows.size()) + "\n";
    if (t.truncated) out += "truncated-at:" + std::to_string(t.rows.size()) + "\n";
    for (const auto& r : rows) {
        out += r;
        out.push_back('\n');
    }
    return out;
}

ResultFingerprint fingerprint(const ExecOutcome& o) {
    ResultFingerprint fp;
    fp.digest = sha256_hex(canonical_encoding(o));
    if (const auto* err = std::get_if<ExecError>(&o)) {
        fp.is_error = true;
        fp.error_class = err->error_class == ErrorClass::None ? ErrorClass::Runtime : err->error_class;
        fp.null_like = true;
        return fp;
    }
    const auto& t = std::get<ResultTable>(o);
    fp.null_like = std::all_of(t.rows.begin(), t.rows.end(), [](const Row& r) {
        return std::all_of(r.begin(), r.end(), [](const Value& v) { return std::holds_alternative<std::monostate>(v); });
    });
    return fp;
}

bool results_equal(const ExecOutcome& a, const ExecOutcome& b) {
    const auto* ea = std::get_if<ExecError>(&a);
    const auto* eb = std::get_if<ExecError>(&b);
    if (ea || eb) {
        auto cls = [](const ExecError* e) { return e->error_class == ErrorClass::None ? ErrorClass::Runtime : e->error_class; };
        return ea && eb && cls(ea) == cls(eb);
    }
    const auto& ta = std::get<ResultTable>(a);
    const auto& tb = std::get<ResultTable>(b);
    if (ta.truncated != tb.truncated) return false;
    if (ta.truncated && ta.rows.size() != tb.rows.size()) return false;
    return canonical_rows(ta) == canonical_rows(tb);
}

namespace {

void render_value(std::string& out, const Value& v) {
    struct Visitor {
        std::string& out;
        void operator()(std::monostate) const { out += "None"; }
        void operator()(std::int64_t i) const { out += std::to_string(i); }
        void operator()(double d) const {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.15g", d);
            out += buf;
            if (std::string_view(buf).find_first_of(".eni") == std::string_view::npos) out += ".0";
        }
        void operator()(const std::string& s) const {
            out.push_back('\'');
            for (char c : s) {
                if (c == '\'' || c == '\\') out.push_back('\\');
                out.push_back(c);
            }
            out.push_back('\'');
        }
        void operator()(const Blob& b) const { out += "<blob " + std::to_string(b.bytes.size()) + " bytes>"; }
    };
    std::visit(Visitor{out}, v);
}

}  // namespace

std::string render_rows(const std::vector<Row>& rows, std::size_t limit) {
    std::string out = "[";
    const std::size_t n = std::min(limit, rows.size());
    for (std::size_t r = 0; r < n; ++r) {
        if (r) out += ", ";
        out.push_back('[');
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (c) out += ", ";
            render_value(out, rows[r][c]);
        }
        out.push_back(']');
    }
    out.push_back(']');
    return out;
}

}  // namespace orange
