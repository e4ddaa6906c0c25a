#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orange {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CatalogError : public Error {
public:
    using Error::Error;
};

/// Schema subset names an item the catalog does not have.
class SubsetError : public Error {
public:
    using Error::Error;
};

class LogFormatError : public Error {
public:
    LogFormatError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

/// Replay mode saw a request that is not in the cassette.
class CassetteMiss : public GatewayError {
public:
    explicit CassetteMiss(std::string digest)
        : GatewayError("cassette miss for request " + digest), digest_(std::move(digest)) {}
    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

/// Model output could not be parsed into plan or annotation blocks.
class ParseFormatError : public Error {
public:
    using Error::Error;
};

/// Decomposition of one candidate gave up after the retry budget.
class ParseError : public Error {
public:
    ParseError(std::string candidate, const std::string& why)
        : Error("decomposition failed: " + why), candidate_(std::move(candidate)) {}
    const std::string& candidate() const noexcept { return candidate_; }

private:
    std::string candidate_;
};

/// SQL could not be tokenized or is structurally broken.
class ExtractError : public Error {
public:
    using Error::Error;
};

class MemoryError : public Error {
public:
    using Error::Error;
};

class TranslateError : public Error {
public:
    using Error::Error;
};

/// Every cluster handed to the voter is an execution error.
class NoValidResult : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace orange
