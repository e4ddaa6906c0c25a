#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orange/knowledge.hpp"
#include "orange/log_store.hpp"

namespace orange {

struct MemoryHeader {
    std::string db_id;
    std::string hash_alg = std::string(kFingerprintAlgorithm);
    std::string embed_model;
    std::size_t dim = 0;  // 0 until the first unit fixes it
    double tau = 0.3;

    bool operator==(const MemoryHeader&) const = default;
};

enum class HistoryMode { SelfOnly, Accumulated, All };

std::string_view to_string(HistoryMode m);
HistoryMode history_mode_from_string(std::string_view s);

/// Immutable slice of a memory that one translation may draw on.
struct MemoryView {
    std::vector<KnowledgeUnit> units;  // insertion order

    std::size_t size() const { return units.size(); }
};

/// Retrieved demonstrations, most similar first.
struct DemoSet {
    std::vector<KnowledgeUnit> demos;
    std::vector<double> similarities;
};

/// Knowledge base of one database: append-only units plus a header, persisted as
/// line-delimited JSON. Every insert rewrites the file through a temporary and a rename.
class Memory {
public:
    /// In-memory only.
    explicit Memory(MemoryHeader header);

    /// Loads `path` if it exists, otherwise starts empty with `header` and writes it.
    static Memory open(const std::filesystem::path& path, MemoryHeader header);
    /// Throws MemoryError when the file is missing or malformed.
    static Memory load(const std::filesystem::path& path);

    /// Appends units not already present (same normalized SQL and fingerprint).
    /// Throws MemoryError on db mismatch, wrong dimensionality or non-unit embeddings.
    std::size_t insert(const std::vector<KnowledgeUnit>& units);

    MemoryView snapshot(HistoryMode mode, const TranslationTask& current) const;

    const MemoryHeader& header() const { return header_; }
    const std::vector<KnowledgeUnit>& units() const { return units_; }
    std::size_t size() const { return units_.size(); }
    const std::optional<std::filesystem::path>& path() const { return path_; }

    void save(const std::filesystem::path& path) const;

private:
    MemoryHeader header_;
    std::vector<KnowledgeUnit> units_;
    std::vector<std::string> identities_;  // sorted
    std::optional<std::filesystem::path> path_;
    std::uint64_t next_inserted_at_ = 1;

    void index(const KnowledgeUnit& u);
};

/// Exact scan: the k units with the largest dot product against `query` (the
/// cosine, as both sides are unit vectors), ties going to the earlier insert.
/// Throws MemoryError when dimensionalities differ.
DemoSet top_k(const MemoryView& view, const Embedding& query, std::size_t k);

/// Uniform sample of k units drawn with `seed`, then ordered like top_k.
DemoSet sample_k(const MemoryView& view, const Embedding& query, std::size_t k, std::uint64_t seed);

}  // namespace orange
