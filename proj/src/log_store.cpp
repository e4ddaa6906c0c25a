#include "orange/log_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "orange/coder.hpp"
#include "orange/errors.hpp"
#include "orange/gateway.hpp"
#include "orange/parallel.hpp"
#include "orange/schema.hpp"
#include "orange/sql_text.hpp"

namespace orange {

using nlohmann::json;

std::optional<std::size_t> ClusterPartition::cluster_of(std::size_t candidate) const {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& m = clusters[c].members;
        if (std::binary_search(m.begin(), m.end(), candidate)) return c;
    }
    return std::nullopt;
}

ClusterPartition partition_by_fingerprint(const std::vector<ResultFingerprint>& fingerprints) {
    ClusterPartition out;
    out.total_candidates = fingerprints.size();
    std::map<std::string, std::size_t> by_digest;
    for (std::size_t i = 0; i < fingerprints.size(); ++i) {
        auto [it, fresh] = by_digest.emplace(fingerprints[i].digest, out.clusters.size());
        if (fresh) out.clusters.push_back({fingerprints[i], {}, i});
        out.clusters[it->second].members.push_back(i);
    }
    std::stable_sort(out.clusters.begin(), out.clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.representative < b.representative;
    });
    return out;
}

ClusterPartition cluster_candidates(const CandidateSet& cands, const std::filesystem::path& db_path,
                                    const ExecLimits& limits, std::size_t workers) {
    std::vector<ResultFingerprint> fps(cands.candidates.size());
    parallel_for(fps.size(), workers, [&](std::size_t i) {
        fps[i] = fingerprint(execute(db_path, cands.candidates[i].sql, limits));
    });
    return partition_by_fingerprint(fps);
}

namespace {

std::string required_string(const json& record, const char* key, std::size_t line) {
    if (!record.contains(key)) throw LogFormatError(line, std::string("missing \"") + key + "\" field");
    const auto& v = record.at(key);
    if (!v.is_string()) throw LogFormatError(line, std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& record, const char* key, std::size_t line) {
    if (!record.contains(key) || record.at(key).is_null()) return std::nullopt;
    if (!record.at(key).is_string()) throw LogFormatError(line, std::string("\"") + key + "\" must be a string");
    return record.at(key).get<std::string>();
}

}  // namespace

LogEntry parse_log_record(const json& record, std::size_t line, bool require_candidates) {
    if (!record.is_object()) throw LogFormatError(line, "record is not a JSON object");
    LogEntry entry;
    auto& task = entry.task;
    task.task_id = required_string(record, "task_id", line);
    task.db_id = required_string(record, "db_id", line);
    task.question = required_string(record, "question", line);
    task.evidence = optional_string(record, "evidence", line).value_or("");
    task.gold_sql = optional_string(record, "gold_sql", line);
    task.difficulty = optional_string(record, "difficulty", line);
    entry.candidates.task_id = task.task_id;

    if (!record.contains("candidates")) {
        if (require_candidates) throw LogFormatError(line, "missing \"candidates\" field");
        return entry;
    }
    const auto& cands = record.at("candidates");
    if (!cands.is_array()) throw LogFormatError(line, "\"candidates\" must be an array");
    if (cands.empty() && require_candidates) throw LogFormatError(line, "\"candidates\" is empty");
    for (const auto& c : cands) {
        if (!c.is_object()) throw LogFormatError(line, "candidate is not an object");
        Candidate cand;
        cand.sql = required_string(c, "sql", line);
        cand.generator_tag = optional_string(c, "generator_tag", line).value_or("unknown");
        entry.candidates.candidates.push_back(std::move(cand));
    }
    return entry;
}

std::vector<LogEntry> load_log(const std::filesystem::path& path, bool require_candidates) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read log " + path.string());
    std::vector<LogEntry> out;
    std::set<std::string> ids;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (trim(text).empty()) continue;
        json record;
        try {
            record = json::parse(text);
        } catch (const json::exception& e) {
            throw LogFormatError(line, std::string("invalid JSON: ") + e.what());
        }
        auto entry = parse_log_record(record, line, require_candidates);
        if (!ids.insert(entry.task.task_id).second)
            throw LogFormatError(line, "duplicate task_id " + entry.task.task_id);
        entry.task.sequence_index = out.size();
        out.push_back(std::move(entry));
    }
    return out;
}

json to_json(const LogEntry& entry) {
    const auto& t = entry.task;
    json j{{"task_id", t.task_id}, {"db_id", t.db_id}, {"question", t.question}, {"evidence", t.evidence}};
    if (t.gold_sql) j["gold_sql"] = *t.gold_sql;
    if (t.difficulty) j["difficulty"] = *t.difficulty;
    json cands = json::array();
    for (const auto& c : entry.candidates.candidates) cands.push_back({{"sql", c.sql}, {"generator_tag", c.generator_tag}});
    j["candidates"] = std::move(cands);
    return j;
}

void write_log(const std::filesystem::path& path, const std::vector<LogEntry>& entries) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write log " + path.string());
    for (const auto& e : entries) out << to_json(e).dump() << '\n';
}

CandidateSet generate_candidates(const TranslationTask& task, const SchemaCatalog& catalog, Gateway& gateway,
                                 std::size_t n, double temperature, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("generate_candidates needs n >= 1");
    const std::string prompt = build_prompt(task, SchemaSubset::everything(), DemoSet{}, catalog);
    CandidateSet out{task.task_id, {}};
    for (std::size_t i = 0; i < n; ++i) {
        ChatRequest req;
        req.messages = coder_messages(prompt);
        req.temperature = temperature;
        req.seed = seed + i;
        req.purpose = "zeroshot";
        const auto resp = gateway.chat(std::move(req));
        auto sql = sql::extract_from_completion(resp.text);
        out.candidates.push_back({sql ? *sql : trim(resp.text), std::string(kZeroShotTag)});
    }
    return out;
}

}  // namespace orange
