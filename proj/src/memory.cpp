#include "orange/memory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "orange/errors.hpp"

namespace orange {

using nlohmann::json;

std::string_view to_string(HistoryMode m) {
    switch (m) {
        case HistoryMode::SelfOnly: return "self";
        case HistoryMode::Accumulated: return "accumulated";
        case HistoryMode::All: return "all";
    }
    return "accumulated";
}

HistoryMode history_mode_from_string(std::string_view s) {
    if (s == "self" || s == "self_only") return HistoryMode::SelfOnly;
    if (s == "accumulated") return HistoryMode::Accumulated;
    if (s == "all") return HistoryMode::All;
    throw ConfigError("unknown history mode: " + std::string(s));
}

namespace {

json header_to_json(const MemoryHeader& h) {
    return {{"db_id", h.db_id}, {"hash_alg", h.hash_alg}, {"embed_model", h.embed_model}, {"dim", h.dim}, {"tau", h.tau}};
}

MemoryHeader header_from_json(const json& j) {
    MemoryHeader h;
    h.db_id = j.at("db_id").get<std::string>();
    h.hash_alg = j.at("hash_alg").get<std::string>();
    h.embed_model = j.at("embed_model").get<std::string>();
    h.dim = j.at("dim").get<std::size_t>();
    h.tau = j.at("tau").get<double>();
    return h;
}

double dot(const Embedding& a, const Embedding& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

DemoSet ranked(std::vector<const KnowledgeUnit*> pool, const Embedding& query, std::size_t k) {
    std::vector<std::pair<double, const KnowledgeUnit*>> scored;
    scored.reserve(pool.size());
    for (const auto* u : pool) {
        if (u->embedding.size() != query.size())
            throw MemoryError("query has dimension " + std::to_string(query.size()) + ", unit " + u->unit_id +
                              " has " + std::to_string(u->embedding.size()));
        scored.emplace_back(dot(query, u->embedding), u);
    }
    const auto n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second->inserted_at < b.second->inserted_at;
                      });
    DemoSet out;
    for (std::size_t i = 0; i < n; ++i) {
        out.demos.push_back(*scored[i].second);
        out.similarities.push_back(scored[i].first);
    }
    return out;
}

}  // namespace

Memory::Memory(MemoryHeader header) : header_(std::move(header)) {}

Memory Memory::open(const std::filesystem::path& path, MemoryHeader header) {
    if (std::filesystem::exists(path)) {
        Memory m = load(path);
        if (m.header_.db_id != header.db_id)
            throw MemoryError("memory file " + path.string() + " belongs to " + m.header_.db_id);
        if (!header.embed_model.empty() && m.header_.embed_model != header.embed_model)
            throw MemoryError("memory file " + path.string() + " was embedded with " + m.header_.embed_model);
        if (m.header_.tau != header.tau)
            spdlog::warn("memory {} was built with tau {}; keeping its header", path.string(), m.header_.tau);
        return m;
    }
    Memory m(std::move(header));
    m.path_ = path;
    m.save(path);
    return m;
}

Memory Memory::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MemoryError("cannot read memory " + path.string());
    std::string line;
    std::size_t lineno = 0;
    std::optional<Memory> m;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto j = json::parse(line);
            if (!m) {
                m.emplace(header_from_json(j));
                continue;
            }
            auto u = unit_from_json(j);
            m->next_inserted_at_ = std::max(m->next_inserted_at_, u.inserted_at + 1);
            m->index(u);
            m->units_.push_back(std::move(u));
        }
    } catch (const json::exception& e) {
        throw MemoryError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!m) throw MemoryError("memory file " + path.string() + " has no header");
    m->path_ = path;
    return std::move(*m);
}

void Memory::index(const KnowledgeUnit& u) {
    auto id = u.identity();
    identities_.insert(std::lower_bound(identities_.begin(), identities_.end(), id), std::move(id));
}

std::size_t Memory::insert(const std::vector<KnowledgeUnit>& units) {
    std::vector<KnowledgeUnit> fresh;
    for (const auto& u : units) {
        if (u.db_id != header_.db_id) throw MemoryError("unit for " + u.db_id + " inserted into memory of " + header_.db_id);
        const std::size_t dim = header_.dim ? header_.dim : u.embedding.size();
        if (dim == 0 || u.embedding.size() != dim)
            throw MemoryError("embedding dimension " + std::to_string(u.embedding.size()) + " does not match " +
                              std::to_string(dim));
        const double norm = std::sqrt(dot(u.embedding, u.embedding));
        if (std::abs(norm - 1.0) > 1e-6) throw MemoryError("embedding of unit " + u.unit_id + " is not unit length");
        if (!(u.probability >= 0.0 && u.probability <= 1.0)) throw MemoryError("probability out of range");
        if (u.exec_preview.size() > kPreviewRows) throw MemoryError("preview longer than " + std::to_string(kPreviewRows));
        header_.dim = dim;
    }
    for (const auto& u : units) {
        const auto id = u.identity();
        if (std::binary_search(identities_.begin(), identities_.end(), id)) continue;
        KnowledgeUnit copy = u;
        copy.inserted_at = next_inserted_at_++;
        index(copy);
        fresh.push_back(std::move(copy));
    }
    for (auto& u : fresh) units_.push_back(std::move(u));
    if (path_) save(*path_);
    return fresh.size();
}

void Memory::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << header_to_json(header_).dump() << '\n';
        for (const auto& u : units_) out << to_json(u).dump() << '\n';
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

MemoryView Memory::snapshot(HistoryMode mode, const TranslationTask& current) const {
    MemoryView view;
    for (const auto& u : units_) {
        const bool own = u.provenance.task_id == current.task_id;
        bool keep = false;
        switch (mode) {
            case HistoryMode::SelfOnly: keep = own; break;
            case HistoryMode::Accumulated: keep = own || u.provenance.task_sequence_index < current.sequence_index; break;
            case HistoryMode::All: keep = true; break;
        }
        if (keep) view.units.push_back(u);
    }
    return view;
}

DemoSet top_k(const MemoryView& view, const Embedding& query, std::size_t k) {
    std::vector<const KnowledgeUnit*> pool;
    for (const auto& u : view.units) pool.push_back(&u);
    return ranked(std::move(pool), query, k);
}

DemoSet sample_k(const MemoryView& view, const Embedding& query, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(view.units.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Fisher-Yates with an explicit engine so the draw is identical across standard libraries.
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    idx.resize(std::min(k, idx.size()));
    std::vector<const KnowledgeUnit*> pool;
    for (auto i : idx) pool.push_back(&view.units[i]);
    return ranked(std::move(pool), query, k);
}

}  // namespace orange
