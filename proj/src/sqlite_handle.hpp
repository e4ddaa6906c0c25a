#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <sqlite3.h>

#include "orange/errors.hpp"

namespace orange::detail {

struct StmtDeleter {
    void operator()(sqlite3_stmt* s) const noexcept { sqlite3_finalize(s); }
};
using Stmt = std::unique_ptr<sqlite3_stmt, StmtDeleter>;

/// Owning sqlite3 connection.
class Connection {
public:
    Connection() = default;

    static Connection open_read_only(const std::filesystem::path& path) {
        sqlite3* raw = nullptr;
        const int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX, nullptr);
        Connection conn(raw);
        if (rc != SQLITE_OK) throw Error("cannot open " + path.string() + ": " + conn.last_error());
        return conn;
    }

    static Connection open_read_write(const std::filesystem::path& path) {
        sqlite3* raw = nullptr;
        const int rc = sqlite3_open_v2(path.c_str(), &raw,
                                       SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX, nullptr);
        Connection conn(raw);
        if (rc != SQLITE_OK) throw Error("cannot open " + path.string() + ": " + conn.last_error());
        return conn;
    }

    sqlite3* get() const { return db_.get(); }

    std::string last_error() const { return db_ ? sqlite3_errmsg(db_.get()) : "out of memory"; }

    /// Prepared statement, or null with the error retrievable via last_error().
    Stmt prepare(const std::string& sql, const char** tail = nullptr) const {
        sqlite3_stmt* raw = nullptr;
        sqlite3_prepare_v2(db_.get(), sql.c_str(), static_cast<int>(sql.size()), &raw, tail);
        return Stmt(raw);
    }

    void exec(const std::string& sql) const {
        char* err = nullptr;
        if (sqlite3_exec(db_.get(), sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown error";
            sqlite3_free(err);
            throw Error(msg);
        }
    }

private:
    struct Closer {
        void operator()(sqlite3* db) const noexcept { sqlite3_close_v2(db); }
    };
    explicit Connection(sqlite3* db) : db_(db) {}
    std::unique_ptr<sqlite3, Closer> db_;
};

}  // namespace orange::detail
