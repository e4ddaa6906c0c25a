#pragma once

#include <vector>

#include "orange/knowledge.hpp"
#include "orange/log_store.hpp"

namespace orange {

struct ValidatorConfig {
    double tau = 0.3;

    /// Throws ConfigError unless 0 <= tau <= 1.
    void validate() const;
};

/// Share of the task's candidates (errors included) that fall in the cluster.
double candidate_probability(const ClusterPartition& partition, std::size_t cluster_index);

/// Scores each unit with the probability of its source candidate's cluster
/// (looked up through provenance.candidate_index), merges units sharing normalized
/// SQL and fingerprint under the highest score, and drops those scoring below tau.
std::vector<KnowledgeUnit> score_and_filter(const std::vector<KnowledgeUnit>& units, const ClusterPartition& partition,
                                            const ValidatorConfig& cfg);

}  // namespace orange
