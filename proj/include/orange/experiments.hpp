#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/gateway.hpp"
#include "orange/pipeline.hpp"

namespace orange {

enum class SweepParam { Shots, Tau };
enum class Ablation { None, History, Validator, Ranking, SchemaLinking, All };

SweepParam sweep_param_from_string(std::string_view s);
std::string_view to_string(SweepParam p);
Ablation ablation_from_string(std::string_view s);
std::string_view to_string(Ablation a);

/// Config with one component switched off.
RunConfig apply_ablation(RunConfig cfg, Ablation which);

struct SweepRow {
    double value = 0.0;
    double ex = 0.0;
    std::size_t units = 0;  // memory units after the run
    std::filesystem::path run_dir;
};

/// Builds a gateway for one run directory (cassettes live under it).
using GatewayFactory = std::function<std::unique_ptr<Gateway>(const std::filesystem::path& run_dir)>;

/// One full run per distinct value, each in `<out_dir>/<param>-<value>` with its
/// own memory. Repeated values are dropped with a warning.
std::vector<SweepRow> sweep(SweepParam param, const std::vector<double>& values, const RunConfig& base,
                            const GatewayFactory& make_gateway);

/// Tab-separated table with a header line.
std::string format_sweep(SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace orange
