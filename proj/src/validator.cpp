#include "orange/validator.hpp"

#include <map>
#include <stdexcept>

#include "orange/errors.hpp"

namespace orange {

void ValidatorConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
}

double candidate_probability(const ClusterPartition& partition, std::size_t cluster_index) {
    if (cluster_index >= partition.clusters.size()) throw std::out_of_range("cluster index out of range");
    return static_cast<double>(partition.clusters[cluster_index].size()) /
           static_cast<double>(partition.total_candidates);
}

std::vector<KnowledgeUnit> score_and_filter(const std::vector<KnowledgeUnit>& units, const ClusterPartition& partition,
                                            const ValidatorConfig& cfg) {
    cfg.validate();
    std::vector<KnowledgeUnit> merged;
    std::map<std::string, std::size_t> by_identity;
    for (const auto& u : units) {
        const auto cluster = partition.cluster_of(u.provenance.candidate_index);
        if (!cluster) throw std::invalid_argument("unit " + u.unit_id + " has no source cluster");
        KnowledgeUnit scored = u;
        scored.probability = candidate_probability(partition, *cluster);
        auto [it, fresh] = by_identity.emplace(scored.identity(), merged.size());
        if (fresh) {
            merged.push_back(std::move(scored));
        } else if (scored.probability > merged[it->second].probability) {
            merged[it->second].probability = scored.probability;
        }
    }
    std::vector<KnowledgeUnit> out;
    for (auto& u : merged)
        if (!(u.probability < cfg.tau)) out.push_back(std::move(u));
    return out;
}

}  // namespace orange
