#include <doctest.h>

#include "orange/eval.hpp"
#include "support.hpp"

using namespace orange;

TEST_CASE("execution accuracy compares result multisets") {
    const auto db = test::fixtures().db_dir / "school.sqlite";
    const ExecLimits lim;
    CHECK(execution_accuracy("SELECT COUNT(*) FROM clubs", "SELECT COUNT(club_id) FROM clubs", db, lim).ex == 1);
    CHECK(execution_accuracy("SELECT name FROM clubs ORDER BY name", "SELECT name FROM clubs", db, lim).ex == 1);
    CHECK(execution_accuracy("SELECT COUNT(*) FROM courses", "SELECT COUNT(*) FROM clubs", db, lim).ex == 0);
    const auto syntax = execution_accuracy("SELEC 1", "SELECT COUNT(*) FROM clubs", db, lim);
    CHECK(syntax.ex == 0);
    CHECK(syntax.prediction_error == ErrorClass::Syntax);
    const auto bad_gold = execution_accuracy("SELECT 1", "SELECT missing FROM clubs", db, lim);
    CHECK_FALSE(bad_gold.gold_valid);
    CHECK(bad_gold.ex == 0);
}

TEST_CASE("summary excludes invalid gold and splits by difficulty") {
    std::vector<EvalRecord> recs{
        {"a", "d", "", "", 1, true, ErrorClass::None, "simple"},
        {"b", "d", "", "", 0, true, ErrorClass::None, "simple"},
        {"c", "d", "", "", 1, true, ErrorClass::None, "hard"},
        {"d", "d", "", "", 0, false, ErrorClass::None, "hard"},
    };
    const auto r = summarize(recs);
    CHECK(r.scored == 3);
    CHECK(r.invalid_gold == 1);
    CHECK(r.ex == doctest::Approx(2.0 / 3));
    CHECK(r.ex_by_difficulty.at("simple") == doctest::Approx(0.5));
    CHECK(r.ex_by_difficulty.at("hard") == doctest::Approx(1.0));
    CHECK(r.to_json()["tasks"].size() == 4);
}

TEST_CASE("evaluate scores predictions file against the log") {
    test::TempDir dir;
    const auto& fx = test::fixtures();
    const auto entries = load_log(fx.log);
    {
        std::ofstream out(dir / "p.jsonl");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i == 0) continue;  // missing prediction scores 0
            const auto sql = i % 2 ? *entries[i].task.gold_sql : std::string("SELECT 'wrong'");
            out << nlohmann::json{{"task_id", entries[i].task.task_id}, {"sql", sql}}.dump() << "\n";
        }
    }
    const auto preds = load_predictions(dir / "p.jsonl");
    const auto report = evaluate(entries, preds, fx.db_dir, {});
    CHECK(report.scored == entries.size());
    CHECK(report.ex == doctest::Approx(15.0 / 30));
}

TEST_CASE("gold against itself scores 1 on every fixture task") {
    const auto& fx = test::fixtures();
    for (const auto& e : load_log(fx.log)) {
        INFO(e.task.task_id);
        const auto db = fx.db_dir / (e.task.db_id + ".sqlite");
        CHECK(execution_accuracy(*e.task.gold_sql, *e.task.gold_sql, db, {}).ex == 1);
    }
}
