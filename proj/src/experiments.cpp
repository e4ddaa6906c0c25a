#include "orange/experiments.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "orange/errors.hpp"

namespace orange {

SweepParam sweep_param_from_string(std::string_view s) {
    if (s == "shots") return SweepParam::Shots;
    if (s == "tau") return SweepParam::Tau;
    throw ConfigError("unknown sweep parameter: " + std::string(s));
}

std::string_view to_string(SweepParam p) { return p == SweepParam::Shots ? "shots" : "tau"; }

Ablation ablation_from_string(std::string_view s) {
    if (s == "none") return Ablation::None;
    if (s == "history") return Ablation::History;
    if (s == "validator") return Ablation::Validator;
    if (s == "ranking") return Ablation::Ranking;
    if (s == "schema_linking" || s == "schema-linking") return Ablation::SchemaLinking;
    if (s == "all") return Ablation::All;
    throw ConfigError("unknown ablation: " + std::string(s));
}

std::string_view to_string(Ablation a) {
    switch (a) {
        case Ablation::None: return "none";
        case Ablation::History: return "history";
        case Ablation::Validator: return "validator";
        case Ablation::Ranking: return "ranking";
        case Ablation::SchemaLinking: return "schema_linking";
        case Ablation::All: return "all";
    }
    return "none";
}

RunConfig apply_ablation(RunConfig cfg, Ablation which) {
    switch (which) {
        case Ablation::None: break;
        case Ablation::History: cfg.history = HistoryMode::SelfOnly; break;
        case Ablation::Validator: cfg.validator.tau = 0.0; break;
        case Ablation::Ranking: cfg.coder.selection = DemoSelection::Random; break;
        case Ablation::SchemaLinking: cfg.coder.schema_linking = false; break;
        case Ablation::All: cfg.majority_only = true; break;
    }
    return cfg;
}

std::vector<SweepRow> sweep(SweepParam param, const std::vector<double>& values, const RunConfig& base,
                            const GatewayFactory& make_gateway) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<double> distinct;
    for (double v : values) {
        if (std::find(distinct.begin(), distinct.end(), v) != distinct.end()) {
            spdlog::warn("dropping repeated sweep value {}", v);
            continue;
        }
        if (param == SweepParam::Shots && (v < 0 || v != std::floor(v)))
            throw ConfigError(fmt::format("shots must be a non-negative integer, got {}", v));
        distinct.push_back(v);
    }
    std::vector<SweepRow> rows;
    for (double v : distinct) {
        RunConfig cfg = base;
        if (param == SweepParam::Shots) cfg.coder.shots = static_cast<std::size_t>(v);
        else cfg.validator.tau = v;
        cfg.validator.validate();
        cfg.out_dir = base.out_dir / fmt::format("{}-{}", to_string(param), v);
        cfg.memory_dir.clear();
        auto gateway = make_gateway(cfg.out_dir);
        const auto report = run(cfg, *gateway);
        rows.push_back({v, report.eval.ex, report.total_units(), cfg.out_dir});
    }
    return rows;
}

std::string format_sweep(SweepParam param, const std::vector<SweepRow>& rows) {
    std::string out = fmt::format("{}\tex\tunits\n", to_string(param));
    for (const auto& r : rows) out += fmt::format("{}\t{:.4f}\t{}\n", r.value, r.ex, r.units);
    return out;
}

}  // namespace orange
