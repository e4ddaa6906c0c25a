#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace orange {

using Embedding = std::vector<double>;

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
    std::string model;
    /// Caller label such as "parser.plan" or "coder"; part of the digest, never sent on the wire.
    std::string purpose;

    /// Throws GatewayError when messages are empty or roles are out of order.
    void validate() const;
};

struct ChatResponse {
    std::string text;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
};

enum class GatewayMode { Live, Record, Replay, Mock };

std::string_view to_string(GatewayMode m);
GatewayMode gateway_mode_from_string(std::string_view s);

/// Line-ending and trailing-whitespace insensitive form used for digests.
std::string normalize_for_digest(std::string_view text);
std::string request_digest(const ChatRequest& req);
std::string embed_digest(std::string_view model, const std::vector<std::string>& texts);

/// Scales `v` to unit L2 norm in place; throws GatewayError for the zero vector.
void normalize_l2(Embedding& v);

/// Anything that can answer chat and embedding calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse chat(const ChatRequest& req) = 0;
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string embed_model() const = 0;
};

/// Chat-completions style HTTP endpoints.
struct HttpEndpoints {
    std::string chat_base;  // e.g. "https://api.example.com/v1"
    std::string chat_key;
    std::string chat_model = "gpt-4o-mini";
    std::string embed_base;
    std::string embed_key;
    std::string embed_model = "all-MiniLM-L6-v2";
    int attempts = 3;
    std::chrono::milliseconds backoff{500};
    std::chrono::seconds request_timeout{120};

    /// Reads ORANGE_CHAT_BASE, ORANGE_CHAT_KEY, ORANGE_EMBED_BASE, ORANGE_EMBED_KEY
    /// and the optional ORANGE_CHAT_MODEL / ORANGE_EMBED_MODEL.
    static HttpEndpoints from_environment();
};

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpEndpoints endpoints);
    ChatResponse chat(const ChatRequest& req) override;
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    std::string embed_model() const override { return endpoints_.embed_model; }

private:
    nlohmann::json post(const std::string& base, const std::string& key, const std::string& path,
                        const nlohmann::json& body);
    HttpEndpoints endpoints_;
};

/// Recorded request/response pairs, keyed by request digest.
class Cassette {
public:
    Cassette() = default;
    /// Loads existing entries if the file exists; appends go to the same file.
    explicit Cassette(std::filesystem::path path);

    /// Next stored response for the digest; the last one repeats once exhausted.
    std::optional<nlohmann::json> lookup(const std::string& digest);
    void append(const std::string& kind, const std::string& digest, const nlohmann::json& request,
                const nlohmann::json& response);
    std::size_t size() const;
    /// Model tag of the first recorded embedding call, if any.
    std::optional<std::string> embed_model() const;

private:
    struct Slot {
        std::vector<nlohmann::json> responses;
        std::size_t next = 0;
    };
    std::optional<std::filesystem::path> path_;
    std::map<std::string, Slot> entries_;
    std::size_t count_ = 0;
    std::optional<std::string> embed_model_;
    mutable std::mutex mu_;
};

struct GatewayOptions {
    GatewayMode mode = GatewayMode::Mock;
    std::optional<std::filesystem::path> cassette;  // record/replay
    /// Source of truth for live, record and mock modes. Record mode may wrap a mock
    /// backend, which is how offline cassettes are produced.
    std::shared_ptr<Backend> upstream;
    std::string chat_model = "gpt-4o-mini";
    std::string embed_model;  // replay: defaults to the model recorded in the cassette
    int max_in_flight = 4;
};

/// Uniform, thread-safe client used by every pipeline stage.
class Gateway {
public:
    explicit Gateway(GatewayOptions options);
    ~Gateway();

    ChatResponse chat(ChatRequest req);
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);

    GatewayMode mode() const { return options_.mode; }
    const std::string& chat_model() const { return options_.chat_model; }
    std::string embed_model() const;

    /// Number of chat calls whose purpose starts with `prefix` ("" counts all).
    std::size_t chat_calls(std::string_view prefix = {}) const;
    std::size_t upstream_calls() const { return upstream_calls_.load(); }

private:
    struct Slot;
    GatewayOptions options_;
    std::unique_ptr<Cassette> cassette_;
    std::unique_ptr<Slot> slots_;
    mutable std::mutex count_mu_;
    std::map<std::string, std::size_t> calls_by_purpose_;
    std::atomic<std::size_t> upstream_calls_{0};

    void count(const std::string& purpose);
};

}  // namespace orange
