#include <doctest.h>

#include "orange/errors.hpp"
#include "orange/validator.hpp"
#include "support.hpp"

using namespace orange;

namespace {

ClusterPartition sized(const std::vector<std::size_t>& sizes) {
    std::vector<ResultFingerprint> fps;
    for (std::size_t c = 0; c < sizes.size(); ++c)
        for (std::size_t i = 0; i < sizes[c]; ++i) {
            ResultFingerprint f;
            f.digest = sha256_hex("cluster" + std::to_string(c));
            fps.push_back(f);
        }
    return partition_by_fingerprint(fps);
}

KnowledgeUnit unit_from(std::size_t candidate, const std::string& sql) {
    KnowledgeUnit u;
    u.sql = sql;
    u.exec_fingerprint.digest = sha256_hex(sql);
    u.provenance.candidate_index = candidate;
    return u;
}

}  // namespace

TEST_CASE("probability is cluster share of all candidates") {
    const auto p = sized({6, 5, 9});
    CHECK(p.total_candidates == 20);
    CHECK(candidate_probability(p, 0) == doctest::Approx(9.0 / 20));
    CHECK(candidate_probability(p, 2) == doctest::Approx(5.0 / 20));
    CHECK_THROWS_AS(candidate_probability(p, 3), std::out_of_range);
}

TEST_CASE("strict threshold: equal to tau survives") {
    const auto p = sized({3, 7});  // candidates 0..2 in the 3-cluster
    const auto out = score_and_filter({unit_from(0, "SELECT a"), unit_from(5, "SELECT b")}, p, {0.3});
    REQUIRE(out.size() == 2);
    CHECK(out[0].probability == doctest::Approx(0.3));
    CHECK(score_and_filter({unit_from(0, "SELECT a")}, p, {0.31}).empty());
}

TEST_CASE("identical units merge under the highest score") {
    const auto p = sized({2, 8});  // 0..1 small, 2..9 large
    const auto out = score_and_filter({unit_from(0, "SELECT a"), unit_from(4, "SELECT a")}, p, {0.0});
    REQUIRE(out.size() == 1);
    CHECK(out[0].probability == doctest::Approx(0.8));
    CHECK(out[0].provenance.candidate_index == 0);
}

TEST_CASE("invalid tau and unknown candidates are rejected") {
    CHECK_THROWS_AS(ValidatorConfig{1.5}.validate(), ConfigError);
    CHECK_THROWS_AS(ValidatorConfig{-0.1}.validate(), ConfigError);
    CHECK_THROWS_AS(score_and_filter({unit_from(99, "x")}, sized({2}), {0.3}), std::invalid_argument);
}
