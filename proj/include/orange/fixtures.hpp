#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace orange {

/// Desk-scale corpus: three SQLite databases plus a 30-task translation log.
struct FixtureCorpus {
    std::filesystem::path root;
    std::filesystem::path db_dir;
    std::filesystem::path log;        // tasks with gold SQL and candidates
    std::filesystem::path questions;  // same tasks without candidates, for `ingest`
    std::vector<std::string> db_ids;
};

/// Sodium atoms in non-carcinogenic molecules; the toxicology fixture is seeded
/// so that it returns [[17]].
inline constexpr std::string_view kSodiumSql =
    "SELECT COUNT(T1.atom_id) FROM atom AS T1 INNER JOIN molecule AS T2 ON T1.molecule_id = T2.molecule_id "
    "WHERE T1.element = 'na' AND T2.label = '-';";

/// Writes the corpus under `out_dir`, replacing earlier fixture files.
/// Output is byte-for-byte deterministic. Throws IoError if `out_dir` is not writable.
FixtureCorpus make_fixtures(const std::filesystem::path& out_dir);

}  // namespace orange
