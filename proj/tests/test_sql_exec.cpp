#include <doctest.h>

#include "orange/errors.hpp"
#include "orange/sql_exec.hpp"
#include "support.hpp"

using namespace orange;

namespace {

fs::path numbers_db(const test::TempDir& dir) {
    return test::make_db(dir / "n.sqlite",
                         "CREATE TABLE t (a INTEGER, b REAL, c TEXT);"
                         "INSERT INTO t VALUES (1, 1.0, 'x'), (2, 2.5, 'y'), (3, NULL, NULL);"
                         "CREATE TABLE big (v INTEGER);"
                         "WITH RECURSIVE r(i) AS (SELECT 1 UNION ALL SELECT i + 1 FROM r WHERE i < 50) "
                         "INSERT INTO big SELECT i FROM r;");
}

ExecLimits limits() { return {5.0, 10'000}; }

}  // namespace

TEST_CASE("execute returns typed rows") {
    test::TempDir dir;
    const auto db = numbers_db(dir);
    const auto out = execute(db, "SELECT a, b, c FROM t ORDER BY a", limits());
    REQUIRE_FALSE(is_error(out));
    const auto& t = std::get<ResultTable>(out);
    CHECK(t.column_names == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 3);
    CHECK(std::get<std::int64_t>(t.rows[0][0]) == 1);
    CHECK(std::get<double>(t.rows[1][1]) == 2.5);
    CHECK(std::holds_alternative<std::monostate>(t.rows[2][2]));
}

TEST_CASE("execute classifies failures and refuses writes") {
    test::TempDir dir;
    const auto db = numbers_db(dir);
    CHECK(std::get<ExecError>(execute(db, "SELEC a FROM t", limits())).error_class == ErrorClass::Syntax);
    CHECK(std::get<ExecError>(execute(db, "SELECT nope FROM t", limits())).error_class != ErrorClass::None);
    CHECK(is_error(execute(db, "DELETE FROM t", limits())));
    CHECK(is_error(execute(db, "SELECT 1; SELECT 2", limits())));
    CHECK(is_error(execute(dir / "absent.sqlite", "SELECT 1", limits())));
    CHECK(std::get<ResultTable>(execute(db, "SELECT COUNT(*) FROM t", limits())).rows.size() == 1);
}

TEST_CASE("execute enforces the time limit") {
    test::TempDir dir;
    const auto db = numbers_db(dir);
    const auto out = execute(db,
                             "WITH RECURSIVE r(i) AS (SELECT 1 UNION ALL SELECT i + 1 FROM r) "
                             "SELECT COUNT(*) FROM r",
                             {0.2, 10});
    REQUIRE(is_error(out));
    CHECK(std::get<ExecError>(out).error_class == ErrorClass::Timeout);
}

TEST_CASE("execute truncates at max_rows") {
    test::TempDir dir;
    const auto db = numbers_db(dir);
    const auto t = std::get<ResultTable>(execute(db, "SELECT v FROM big", {5.0, 10}));
    CHECK(t.truncated);
    CHECK(t.rows.size() == 10);
    CHECK(t.row_count_before_truncation == 50);
}

TEST_CASE("fingerprint ignores row order and column names, keeps column order") {
    test::TempDir dir;
    const auto db = numbers_db(dir);
    const auto a = execute(db, "SELECT a, c FROM t ORDER BY a", limits());
    const auto b = execute(db, "SELECT a AS x, c AS y FROM t ORDER BY a DESC", limits());
    const auto c = execute(db, "SELECT c, a FROM t", limits());
    CHECK(fingerprint(a) == fingerprint(b));
    CHECK(results_equal(a, b));
    CHECK_FALSE(fingerprint(a) == fingerprint(c));
    CHECK_FALSE(results_equal(a, c));
}

TEST_CASE("numeric canonicalization") {
    CHECK(canonical_value(Value{1.0}) == canonical_value(Value{std::int64_t{1}}));
    CHECK(canonical_value(Value{0.1 + 0.2}) == canonical_value(Value{0.3}));
    CHECK(canonical_value(Value{-0.0}) == canonical_value(Value{0.0}));
    CHECK(canonical_value(Value{1.5}) != canonical_value(Value{1.500002}));
    CHECK(canonical_value(Value{std::string("1")}) != canonical_value(Value{std::int64_t{1}}));
    CHECK(canonical_value(Value{std::monostate{}}) != canonical_value(Value{std::string("")}));
}

TEST_CASE("multiset semantics: duplicate rows count") {
    ResultTable one{{"a"}, {{std::int64_t{1}}}, false, 1};
    ResultTable two{{"a"}, {{std::int64_t{1}}, {std::int64_t{1}}}, false, 2};
    CHECK_FALSE(results_equal(one, two));
    CHECK_FALSE(fingerprint(one) == fingerprint(two));
}

TEST_CASE("null-like flag") {
    CHECK(fingerprint(ResultTable{}).null_like);
    CHECK(fingerprint(ResultTable{{"a"}, {{std::monostate{}}}, false, 1}).null_like);
    CHECK_FALSE(fingerprint(ResultTable{{"a"}, {{std::int64_t{0}}}, false, 1}).null_like);
    const auto err = fingerprint(ExecError{ErrorClass::Syntax, "x"});
    CHECK(err.is_error);
    CHECK(err.null_like);
    CHECK(fingerprint(ExecError{ErrorClass::Syntax, "a"}) == fingerprint(ExecError{ErrorClass::Syntax, "b"}));
    CHECK_FALSE(fingerprint(ExecError{ErrorClass::Syntax, "a"}) == fingerprint(ExecError{ErrorClass::Runtime, "a"}));
}

TEST_CASE("render_rows previews at most the limit") {
    std::vector<Row> rows{{std::int64_t{17}}};
    CHECK(render_rows(rows) == "[[17]]");
    std::vector<Row> many(5, Row{std::string("a"), 2.0});
    const auto s = render_rows(many, 3);
    CHECK(std::count(s.begin(), s.end(), '[') == 4);
}

TEST_CASE("sodium query on the toxicology fixture") {
    const auto& fx = test::fixtures();
    const auto out = execute(fx.db_dir / "toxicology.sqlite", kSodiumSql, limits());
    REQUIRE_FALSE(is_error(out));
    CHECK(render_rows(std::get<ResultTable>(out).rows) == "[[17]]");
}

TEST_CASE("sha256_hex known vector") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
