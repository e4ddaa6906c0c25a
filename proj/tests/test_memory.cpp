#include <doctest.h>

#include <cmath>

#include "orange/errors.hpp"
#include "orange/memory.hpp"
#include "orange/mock_responder.hpp"
#include "support.hpp"

using namespace orange;

namespace {

KnowledgeUnit unit(const std::string& db, const std::string& sql, const std::string& task, std::size_t seq,
                   std::size_t dim = 8) {
    KnowledgeUnit u;
    u.db_id = db;
    u.sql = sql;
    u.question = "q " + sql;
    u.reasoning = "r";
    u.exec_preview = {{std::int64_t{1}}};
    u.exec_fingerprint.digest = sha256_hex(sql);
    u.probability = 0.5;
    u.embedding = hash_embedding(sql, dim, 1);
    u.provenance = {task, seq, 0, 0};
    u.unit_id = make_unit_id(db, sql, u.exec_fingerprint);
    return u;
}

MemoryHeader header(const std::string& db = "d") {
    MemoryHeader h;
    h.db_id = db;
    h.embed_model = "mock";
    return h;
}

}  // namespace

TEST_CASE("insert validates and skips duplicates") {
    Memory m(header());
    auto respelled = unit("d", "select  1;", "t", 0);
    respelled.exec_fingerprint = unit("d", "SELECT 1", "t", 0).exec_fingerprint;
    CHECK(m.insert({unit("d", "SELECT 1", "t", 0), unit("d", "SELECT 2", "t", 0), respelled}) == 2);
    CHECK(m.units()[0].inserted_at == 1);
    CHECK(m.units()[1].inserted_at == 2);
    CHECK(m.header().dim == 8);
    CHECK_THROWS_AS(m.insert({unit("other", "SELECT 3", "t", 0)}), MemoryError);
    CHECK_THROWS_AS(m.insert({unit("d", "SELECT 3", "t", 0, 4)}), MemoryError);
    auto scaled = unit("d", "SELECT 4", "t", 0);
    for (auto& x : scaled.embedding) x *= 2;
    CHECK_THROWS_AS(m.insert({scaled}), MemoryError);
    CHECK(m.size() == 2);
}

TEST_CASE("save and load round-trip byte for byte") {
    test::TempDir dir;
    const auto path = dir / "mem" / "d.jsonl";
    {
        auto m = Memory::open(path, header());
        m.insert({unit("d", "SELECT 1", "t", 0), unit("d", "SELECT 2", "u", 1)});
    }
    const auto first = test::slurp(path);
    const auto loaded = Memory::load(path);
    CHECK(loaded.size() == 2);
    CHECK(loaded.units()[1].provenance.task_id == "u");
    loaded.save(dir / "copy.jsonl");
    CHECK(test::slurp(dir / "copy.jsonl") == first);
    CHECK_THROWS_AS(Memory::load(dir / "absent.jsonl"), MemoryError);
    CHECK_THROWS_AS(Memory::open(path, header("other")), MemoryError);
    auto other_model = header();
    other_model.embed_model = "other-model";
    CHECK_THROWS_AS(Memory::open(path, other_model), MemoryError);
    std::ofstream(dir / "broken.jsonl") << "{\"db_id\":\"d\"}\n{oops\n";
    CHECK_THROWS_AS(Memory::load(dir / "broken.jsonl"), MemoryError);
}

TEST_CASE("snapshot modes") {
    Memory m(header());
    m.insert({unit("d", "SELECT 1", "a", 0), unit("d", "SELECT 2", "b", 1), unit("d", "SELECT 3", "c", 2)});
    TranslationTask current{"b", "d", "q", "", {}, {}, 1};
    auto ids = [](const MemoryView& v) {
        std::vector<std::string> out;
        for (const auto& u : v.units) out.push_back(u.sql);
        return out;
    };
    CHECK(ids(m.snapshot(HistoryMode::SelfOnly, current)) == std::vector<std::string>{"SELECT 2"});
    CHECK(ids(m.snapshot(HistoryMode::Accumulated, current)) == std::vector<std::string>{"SELECT 1", "SELECT 2"});
    CHECK(ids(m.snapshot(HistoryMode::All, current)).size() == 3);
    CHECK(history_mode_from_string("self_only") == HistoryMode::SelfOnly);
    CHECK(to_string(HistoryMode::Accumulated) == "accumulated");
}

TEST_CASE("top_k ranks by similarity with insertion-order ties") {
    MemoryView view;
    const auto e = hash_embedding("same", 8, 1);
    for (int i = 0; i < 4; ++i) {
        auto u = unit("d", "SELECT " + std::to_string(i), "t", 0);
        u.embedding = e;
        u.inserted_at = static_cast<std::uint64_t>(i + 1);
        view.units.push_back(u);
    }
    view.units[2].embedding = hash_embedding("different", 8, 1);
    const auto top = top_k(view, e, 3);
    REQUIRE(top.demos.size() == 3);
    CHECK(top.demos[0].sql == "SELECT 0");
    CHECK(top.demos[1].sql == "SELECT 1");
    CHECK(top.demos[2].sql == "SELECT 3");
    CHECK(top.similarities[0] == doctest::Approx(1.0));
    CHECK(top_k(view, e, 10).demos.size() == 4);
    CHECK_THROWS_AS(top_k(view, hash_embedding("x", 4, 1), 1), MemoryError);
}

TEST_CASE("sample_k is seeded and returns distinct units") {
    MemoryView view;
    for (int i = 0; i < 20; ++i) {
        auto u = unit("d", "SELECT " + std::to_string(i), "t", 0);
        u.inserted_at = static_cast<std::uint64_t>(i + 1);
        view.units.push_back(u);
    }
    const auto q = hash_embedding("query", 8, 1);
    const auto a = sample_k(view, q, 5, 42);
    const auto b = sample_k(view, q, 5, 42);
    const auto c = sample_k(view, q, 5, 43);
    REQUIRE(a.demos.size() == 5);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.demos[i].sql == b.demos[i].sql);
        seen.insert(a.demos[i].sql);
        if (i > 0) CHECK(a.similarities[i - 1] >= a.similarities[i]);
    }
    CHECK(seen.size() == 5);
    std::set<std::string> other;
    for (const auto& d : c.demos) other.insert(d.sql);
    CHECK(other != seen);
}
