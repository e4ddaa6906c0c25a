#include <doctest.h>

#include "orange/errors.hpp"
#include "orange/log_store.hpp"
#include "orange/schema_items.hpp"
#include "support.hpp"

using namespace orange;

namespace {

std::set<std::string> extracted(const std::string& sql, const SchemaCatalog& cat) {
    return test::expanded(cat, extract_schema_items(sql, cat));
}

}  // namespace

TEST_CASE("aliases, joins and qualified columns resolve to catalog ids") {
    const auto& fx = test::fixtures();
    const auto cat = load_catalog(fx.db_dir / "toxicology.sqlite");
    const auto items = extract_schema_items(kSodiumSql, cat);
    CHECK(items.ids == std::set<std::string>{"atom", "atom.atom_id", "atom.molecule_id", "atom.element", "molecule",
                                             "molecule.molecule_id", "molecule.label"});
}

TEST_CASE("select-list aliases and string literals are not columns") {
    const auto& fx = test::fixtures();
    const auto cat = load_catalog(fx.db_dir / "toxicology.sqlite");
    const auto items = extract_schema_items(
        "SELECT label AS element, COUNT(*) AS n FROM molecule GROUP BY element ORDER BY n DESC", cat);
    CHECK(items.ids == std::set<std::string>{"molecule", "molecule.label"});
}

TEST_CASE("star expands to the table's columns") {
    const auto& fx = test::fixtures();
    const auto cat = load_catalog(fx.db_dir / "toxicology.sqlite");
    const auto items = extract_schema_items("SELECT T.* FROM molecule AS T", cat);
    CHECK(test::expanded(cat, items) == test::expanded(cat, SchemaSubset::of({"molecule"})));
}

TEST_CASE("malformed text throws ExtractError") {
    const auto& fx = test::fixtures();
    const auto cat = load_catalog(fx.db_dir / "toxicology.sqlite");
    CHECK_THROWS_AS(extract_schema_items("SELECT (a FROM atom", cat), ExtractError);
    CHECK_THROWS_AS(extract_schema_items("SELECT 'open FROM atom", cat), ExtractError);
    CHECK_THROWS_AS(extract_schema_items("DELETE FROM atom", cat), ExtractError);
}

TEST_CASE("agrees with the engine on every fixture candidate and extra shapes") {
    const auto& fx = test::fixtures();
    const auto entries = load_log(fx.log);
    std::map<std::string, std::vector<std::string>> by_db;
    for (const auto& e : entries)
        for (const auto& c : e.candidates.candidates) by_db[e.task.db_id].push_back(c.sql);
    by_db["toxicology"].insert(by_db["toxicology"].end(), {
        "SELECT COUNT(*) FROM bond",
        "SELECT m.label, (SELECT COUNT(*) FROM atom a WHERE a.molecule_id = m.molecule_id) FROM molecule m",
        "WITH na AS (SELECT molecule_id FROM atom WHERE element = 'na') SELECT COUNT(DISTINCT molecule_id) FROM na",
        "SELECT x.k FROM (SELECT label AS k FROM molecule) AS x",
        "SELECT molecule_id FROM molecule WHERE molecule_id IN (SELECT molecule_id FROM bond WHERE bond_type = '=')",
        "SELECT * FROM connected JOIN bond USING (bond_id)",
    });
    std::size_t compared = 0;
    for (const auto& [db, sqls] : by_db) {
        const auto path = fx.db_dir / (db + ".sqlite");
        const auto cat = load_catalog(path);
        for (const auto& sql : sqls) {
            const auto oracle = test::engine_schema_items(path, sql);
            if (!oracle) continue;
            INFO(sql);
            CHECK(extracted(sql, cat) == test::expanded(cat, [&] {
                      SchemaSubset s;
                      for (const auto& id : *oracle) s.insert(id);
                      return s;
                  }()));
            ++compared;
        }
    }
    CHECK(compared > 100);
}
