#include <doctest.h>

#include "orange/coder.hpp"
#include "orange/errors.hpp"
#include "orange/mock_responder.hpp"
#include "orange/prompts.hpp"
#include "support.hpp"

using namespace orange;

namespace {

KnowledgeUnit demo(const std::string& sql, const std::string& question) {
    KnowledgeUnit u;
    u.db_id = "toxicology";
    u.sql = sql;
    u.question = question;
    u.exec_preview = {{std::int64_t{17}}};
    u.exec_fingerprint.digest = sha256_hex(sql);
    return u;
}

ClusterPartition from_tags(const std::vector<std::string>& tags) {
    std::vector<ResultFingerprint> fps;
    for (const auto& t : tags) {
        ResultFingerprint f;
        f.digest = sha256_hex(t);
        f.is_error = t == "err";
        fps.push_back(f);
    }
    return partition_by_fingerprint(fps);
}

struct Tox {
    fs::path db = test::fixtures().db_dir / "toxicology.sqlite";
    SchemaCatalog catalog = load_catalog(db);
};

}  // namespace

TEST_CASE("link_schema unions demo items and falls back when empty") {
    Tox tox;
    DemoSet demos;
    demos.demos = {demo("SELECT label FROM molecule", "a"), demo("SELECT element FROM atom", "b"),
                   demo("SELECT (broken", "c")};
    const auto linked = link_schema(demos, tox.catalog);
    CHECK(linked.ids == std::set<std::string>{"molecule", "molecule.label", "atom", "atom.element"});
    CHECK(link_schema(DemoSet{}, tox.catalog).all);
    CHECK(link_schema(DemoSet{}, tox.catalog, false).empty());
}

TEST_CASE("prompt layout: sections in order, least similar demonstration first") {
    Tox tox;
    DemoSet demos;
    demos.demos = {demo("SELECT 1", "most similar"), demo("SELECT 2", "less similar")};
    demos.similarities = {0.9, 0.1};
    TranslationTask task{"t", "toxicology", "How many bonds?", "", {}, {}, 0};
    const auto p = build_prompt(task, SchemaSubset::of({"bond"}), demos, tox.catalog);
    const auto schema = p.find(prompts::kSchemaSection);
    const auto demo_sec = p.find(prompts::kDemoSection);
    const auto question = p.find(prompts::kQuestionSection);
    const auto format = p.find(prompts::kFormatSection);
    CHECK(schema < demo_sec);
    CHECK(demo_sec < question);
    CHECK(question < format);
    CHECK(p.find(prompts::kEvidenceSection) == std::string::npos);
    CHECK(p.find("less similar") < p.find("most similar"));
    CHECK(p.find("Exec_result: [[17]]") != std::string::npos);
    CHECK(test::rendered_items(test::section(p, std::string(prompts::kSchemaSection))) ==
          test::expanded(tox.catalog, SchemaSubset::of({"bond"})));

    task.evidence = "bond_type '=' means double";
    const auto with_ev = build_prompt(task, SchemaSubset::everything(), demos, tox.catalog);
    CHECK(with_ev.find(prompts::kEvidenceSection) < with_ev.find(prompts::kQuestionSection));
    CHECK(with_ev.find("bond_type '=' means double") != std::string::npos);
    const auto msgs = coder_messages(p);
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].role == "system");
}

TEST_CASE("vote picks the largest non-error cluster, earlier representative on ties") {
    CHECK(vote(from_tags({"a", "b", "b", "a"})) == 0);
    CHECK(vote(from_tags({"b", "a", "a", "b"})) == 0);
    CHECK(vote(from_tags({"x", "a", "a", "b"})) == 1);
    CHECK(vote(from_tags({"err", "err", "err", "a"})) == 3);
    CHECK_THROWS_AS(vote(from_tags({"err", "err"})), NoValidResult);
}

TEST_CASE("translate with an empty memory uses the full schema and no embedding call") {
    Tox tox;
    auto gw = test::mock_gateway();
    TranslationTask task{"t1", "toxicology", "How many things?", "", {}, {}, 0};
    CoderConfig cfg;
    cfg.paths = 3;
    const auto tr = translate(task, MemoryView{}, tox.catalog, cfg, *gw, tox.db, {});
    CHECK(tr.linked.all);
    CHECK(tr.paths.candidates.size() == 3);
    CHECK(gw->chat_calls("coder") == 3);
    CHECK(gw->upstream_calls() == 3);
    CHECK_FALSE(tr.sql.empty());
}

TEST_CASE("translate draws demonstrations and reuses their SQL") {
    Tox tox;
    auto gw = test::mock_gateway();
    MemoryView view;
    for (int i = 0; i < 6; ++i) {
        auto u = demo("SELECT COUNT(*) FROM atom WHERE element = 'c' AND " + std::to_string(i) + " = " + std::to_string(i),
                      "question " + std::to_string(i));
        u.embedding = hash_embedding(u.question, 64, 0);
        u.inserted_at = static_cast<std::uint64_t>(i + 1);
        view.units.push_back(u);
    }
    TranslationTask task{"t2", "toxicology", "question 3", "", {}, {}, 0};
    CoderConfig cfg;
    cfg.shots = 4;
    cfg.paths = 5;
    const auto tr = translate(task, view, tox.catalog, cfg, *gw, tox.db, {});
    CHECK(tr.demos.demos.size() == 4);
    CHECK(tr.linked.ids == std::set<std::string>{"atom", "atom.element"});
    CHECK(tr.prompt.find("CREATE TABLE molecule") == std::string::npos);
    CHECK(std::get<ResultTable>(execute(tox.db, tr.sql, {})).rows == std::get<ResultTable>(execute(tox.db, view.units[0].sql, {})).rows);

    cfg.selection = DemoSelection::Random;
    const auto r1 = translate(task, view, tox.catalog, cfg, *gw, tox.db, {});
    const auto r2 = translate(task, view, tox.catalog, cfg, *gw, tox.db, {});
    CHECK(r1.prompt == r2.prompt);

    cfg.schema_linking = false;
    CHECK(translate(task, view, tox.catalog, cfg, *gw, tox.db, {}).linked.all);
}

TEST_CASE("translate fails when no path yields SQL") {
    Tox tox;
    auto gw = test::fn_gateway([](const ChatRequest&) { return std::string("I cannot help with that."); });
    TranslationTask task{"t3", "toxicology", "q", "", {}, {}, 0};
    CHECK_THROWS_AS(translate(task, MemoryView{}, tox.catalog, CoderConfig{}, *gw, tox.db, {}), TranslateError);
    CHECK_THROWS_AS(CoderConfig{.paths = 0}.validate(), ConfigError);
}
