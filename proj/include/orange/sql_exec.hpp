#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace orange {

struct Blob {
    std::vector<std::uint8_t> bytes;
    bool operator==(const Blob&) const = default;
};

using Value = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;
using Row = std::vector<Value>;

struct ResultTable {
    std::vector<std::string> column_names;
    std::vector<Row> rows;
    bool truncated = false;
    std::size_t row_count_before_truncation = 0;
};

enum class ErrorClass { None, Timeout, Syntax, Runtime };

std::string_view to_string(ErrorClass c);
ErrorClass error_class_from_string(std::string_view s);

struct ExecError {
    ErrorClass error_class = ErrorClass::Runtime;
    std::string message;
};

using ExecOutcome = std::variant<ResultTable, ExecError>;

inline bool is_error(const ExecOutcome& o) { return std::holds_alternative<ExecError>(o); }

struct ExecLimits {
    double timeout_seconds = 30.0;
    std::size_t max_rows = 10'000;

    /// Throws ConfigError unless both limits are positive.
    void validate() const;
};

/// Equality key of an execution outcome. Equal canonical encodings give equal digests.
struct ResultFingerprint {
    std::string digest;  // hex SHA-256 of the canonical encoding
    bool is_error = false;
    ErrorClass error_class = ErrorClass::None;
    bool null_like = false;  // error, no rows, or only NULL values

    bool operator==(const ResultFingerprint& o) const {
        return digest == o.digest && is_error == o.is_error && error_class == o.error_class;
    }
};

inline constexpr std::string_view kFingerprintAlgorithm = "sha256";

/// Runs one read-only statement against a SQLite file. Writes, multiple
/// statements and anything exceeding the time limit come back as ExecError.
ExecOutcome execute(const std::filesystem::path& db_path, std::string_view sql, const ExecLimits& limits);

/// Canonical value encoding: reals rounded to 6 decimals (integral values fold
/// into the integer form), NULL as a reserved token, text and blobs length-prefixed.
std::string canonical_value(const Value& v);

/// Rows as sorted canonical strings; column order kept, row order dropped.
std::vector<std::string> canonical_rows(const ResultTable& t);

/// Full canonical encoding that the fingerprint digests.
std::string canonical_encoding(const ExecOutcome& o);

ResultFingerprint fingerprint(const ExecOutcome& o);

/// Direct comparison of canonical encodings; agrees with fingerprint equality.
bool results_equal(const ExecOutcome& a, const ExecOutcome& b);

/// Bracketed display of at most `limit` rows, e.g. "[[17]]".
std::string render_rows(const std::vector<Row>& rows, std::size_t limit = 3);

std::string sha256_hex(std::string_view data);

}  // namespace orange
