#pragma once

#include <sqlite3.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "orange/fixtures.hpp"
#include "orange/gateway.hpp"
#include "orange/mock_responder.hpp"
#include "orange/schema.hpp"

namespace fs = std::filesystem;

namespace test {

/// Directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("orange-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

/// Creates a database file by running `script` through sqlite3_exec.
inline fs::path make_db(const fs::path& path, const std::string& script) {
    fs::remove(path);
    sqlite3* db = nullptr;
    if (sqlite3_open(path.c_str(), &db) != SQLITE_OK) throw std::runtime_error("open failed");
    char* err = nullptr;
    if (sqlite3_exec(db, script.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "";
        sqlite3_free(err);
        sqlite3_close(db);
        throw std::runtime_error("script failed: " + msg);
    }
    sqlite3_close(db);
    return path;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fixture corpus generated once per test binary.
inline const orange::FixtureCorpus& fixtures() {
    static TempDir dir;
    static const orange::FixtureCorpus corpus = orange::make_fixtures(dir.path());
    return corpus;
}

/// Gateway over the offline mock backend.
inline std::unique_ptr<orange::Gateway> mock_gateway(std::uint64_t seed = 0) {
    orange::GatewayOptions o;
    o.mode = orange::GatewayMode::Mock;
    o.upstream = std::make_shared<orange::MockBackend>(seed);
    return std::make_unique<orange::Gateway>(std::move(o));
}

/// Backend that answers chat requests from a caller-supplied function.
class FnBackend final : public orange::Backend {
public:
    using ChatFn = std::function<std::string(const orange::ChatRequest&)>;
    explicit FnBackend(ChatFn fn) : fn_(std::move(fn)) {}
    orange::ChatResponse chat(const orange::ChatRequest& req) override { return {fn_(req), 0, 0}; }
    std::vector<orange::Embedding> embed(const std::vector<std::string>& texts) override {
        std::vector<orange::Embedding> out;
        for (const auto& t : texts) out.push_back(orange::hash_embedding(t, 16, 3));
        return out;
    }
    std::string embed_model() const override { return "fn-16"; }

private:
    ChatFn fn_;
};

inline std::unique_ptr<orange::Gateway> fn_gateway(FnBackend::ChatFn fn) {
    orange::GatewayOptions o;
    o.mode = orange::GatewayMode::Mock;
    o.upstream = std::make_shared<FnBackend>(std::move(fn));
    return std::make_unique<orange::Gateway>(std::move(o));
}

// ---------------------------------------------------------------------------
// Reference schema-item extraction, computed by the database engine itself:
// the authorizer reports every column a statement reads while it is compiled,
// and the compiled program's OpenRead instructions name every table or index
// it scans (needed for COUNT(*), which reads no column).

namespace detail {

inline int authorizer(void* user, int action, const char* a, const char* b, const char*, const char*) {
    if (action == SQLITE_READ && a) {
        auto* out = static_cast<std::set<std::string>*>(user);
        std::string table = a;
        std::transform(table.begin(), table.end(), table.begin(), [](unsigned char c) { return std::tolower(c); });
        if (table.rfind("sqlite_", 0) == 0) return SQLITE_OK;
        out->insert(table);
        if (b && *b) {
            std::string col = b;
            std::transform(col.begin(), col.end(), col.begin(), [](unsigned char c) { return std::tolower(c); });
            out->insert(table + "." + col);
        }
    }
    return SQLITE_OK;
}

}  // namespace detail

/// Lower-cased "table" and "table.column" ids the engine says `sql` touches.
/// Returns nullopt when the statement does not compile.
inline std::optional<std::set<std::string>> engine_schema_items(const fs::path& db_path, const std::string& sql) {
    sqlite3* db = nullptr;
    if (sqlite3_open_v2(db_path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
        sqlite3_close(db);
        throw std::runtime_error("cannot open " + db_path.string());
    }
    std::set<std::string> items;
    std::map<long long, std::string> root_to_table;
    {
        sqlite3_stmt* st = nullptr;
        sqlite3_prepare_v2(db, "SELECT rootpage, lower(tbl_name) FROM sqlite_master WHERE rootpage > 0", -1, &st, nullptr);
        while (sqlite3_step(st) == SQLITE_ROW)
            root_to_table[sqlite3_column_int64(st, 0)] = reinterpret_cast<const char*>(sqlite3_column_text(st, 1));
        sqlite3_finalize(st);
    }
    sqlite3_set_authorizer(db, detail::authorizer, &items);
    sqlite3_stmt* st = nullptr;
    const std::string explain = "EXPLAIN " + sql;
    const int rc = sqlite3_prepare_v2(db, explain.c_str(), -1, &st, nullptr);
    sqlite3_set_authorizer(db, nullptr, nullptr);
    if (rc != SQLITE_OK) {
        sqlite3_finalize(st);
        sqlite3_close(db);
        return std::nullopt;
    }
    while (sqlite3_step(st) == SQLITE_ROW) {
        const std::string opcode = reinterpret_cast<const char*>(sqlite3_column_text(st, 1));
        if (opcode == "OpenRead") {
            auto it = root_to_table.find(sqlite3_column_int64(st, 3));
            if (it != root_to_table.end()) items.insert(it->second);
        }
    }
    sqlite3_finalize(st);
    sqlite3_close(db);
    return items;
}

/// Lower-cased ids of `s` closed under "a table implies its columns, a column implies its table".
inline std::set<std::string> expanded(const orange::SchemaCatalog& catalog, const orange::SchemaSubset& s) {
    std::set<std::string> out;
    for (const auto* table : catalog.tables()) {
        const bool whole = s.all || s.ids.count(table->key());
        for (const auto* col : catalog.columns_of(table->id)) {
            if (whole || s.ids.count(col->key())) {
                out.insert(col->key());
                out.insert(table->key());
            }
        }
        if (whole) out.insert(table->key());
    }
    return out;
}

/// Table and column ids defined by a rendered schema section.
inline std::set<std::string> rendered_items(const std::string& ddl) {
    std::set<std::string> out;
    std::istringstream in(ddl);
    std::string line, table;
    while (std::getline(in, line)) {
        if (line.rfind("CREATE TABLE ", 0) == 0) {
            table = line.substr(13, line.find(' ', 13) - 13);
            std::transform(table.begin(), table.end(), table.begin(), [](unsigned char c) { return std::tolower(c); });
            out.insert(table);
        } else if (line.rfind("  ", 0) == 0 && line.rfind("  FOREIGN KEY", 0) != 0) {
            std::string col = line.substr(2, line.find_first_of(" ,", 2) - 2);
            std::transform(col.begin(), col.end(), col.begin(), [](unsigned char c) { return std::tolower(c); });
            out.insert(table + "." + col);
        }
    }
    return out;
}

/// Text between `start` and the next "### " header (or the end).
inline std::string section(const std::string& prompt, const std::string& start) {
    const auto s = prompt.find(start);
    if (s == std::string::npos) return {};
    const auto body = prompt.find('\n', s) + 1;
    const auto e = prompt.find("\n### ", body);
    return prompt.substr(body, e == std::string::npos ? std::string::npos : e + 1 - body);
}

}  // namespace test
