#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "orange/gateway.hpp"

namespace orange {

/// Deterministic bag-of-words hash projection: each token seeds a splitmix64
/// stream that contributes one pseudo-random direction; a small whole-text term
/// keeps distinct texts apart. Result has unit L2 norm.
Embedding hash_embedding(std::string_view text, std::size_t dim, std::uint64_t seed);

/// Canned reply for requests whose last user message contains `contains`.
struct ScriptRule {
    std::string purpose;   // empty matches any purpose
    std::string contains;
    std::string response;
};

/// Offline backend. Scripted rules win; otherwise replies are synthesized from the
/// prompt itself: SQL plans and annotations for the parser, demonstration reuse
/// for the coder. Output is a pure function of (seed, request).
class MockBackend final : public Backend {
public:
    explicit MockBackend(std::uint64_t seed = 0, std::size_t dim = 64);

    /// Reads a JSON array of {"purpose","contains","response"} objects.
    static std::vector<ScriptRule> load_script(const std::filesystem::path& path);

    void add_rule(ScriptRule rule) { rules_.push_back(std::move(rule)); }

    ChatResponse chat(const ChatRequest& req) override;
    std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
    std::string embed_model() const override;

private:
    std::uint64_t seed_;
    std::size_t dim_;
    std::vector<ScriptRule> rules_;
};

namespace mock {

/// Least-to-most plan the mock parser proposes for `sql`.
std::vector<std::string> plan_steps(std::string_view sql);

struct Annotation {
    std::string reasoning;
    std::string question;
};

/// Template description of a query's tuple semantics and intent.
Annotation describe(std::string_view sql);

}  // namespace mock
}  // namespace orange
