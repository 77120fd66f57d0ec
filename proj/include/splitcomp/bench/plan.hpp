// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "splitcomp/bench/scenarios.hpp"
#include "splitcomp/cost/cost_model.hpp"

namespace splitcomp::bench {

enum class StageRole { Preprocess, Encoder, FullModel, Tail, DecoderBackbone, Head };

const char* role_name(StageRole r) noexcept;

struct PlanStep {
    enum class Kind { Compute, Uplink } kind = Kind::Compute;
    StageRole role = StageRole::FullModel;
    std::string module;  // deployed module the stage belongs to, for memory accounting
    cost::StageProfile stage;
    double bytes = 0;    // Uplink only
};

/// Ordered, store-and-forward execution of one inference round.
struct ExecutionPlan {
    std::string scenario_id;
    PlanKind kind = PlanKind::LocalCompute;
    std::optional<double> beta;
    std::vector<PlanStep> steps;

    int uplink_messages() const;
    int count(StageRole role, cost::Placement where) const;
    int local_encoder_runs() const { return count(StageRole::Encoder, cost::Placement::Local); }
    int heads_attached() const { return count(StageRole::Head, cost::Placement::Remote); }
};

ExecutionPlan plan(const ScenarioConfig& config, const SplitFixtures& fixtures = default_fixtures());

struct EvalSetting {
    cost::DeviceProfile mobile;
    cost::DeviceProfile server;
    cost::ChannelProfile channel;
    cost::ComputeMode mobile_mode = cost::ComputeMode::Cpu;
    cost::ComputeMode server_mode = cost::ComputeMode::Gpu;
    cost::MeasurementOptions measurement;
};

struct MetricsRecord {
    std::string scenario_id;
    std::string kind;  // "LC", "SC", "Ours"
    std::optional<double> beta;
    double latency_s = 0;
    double latency_local_s = 0;
    double latency_tx_s = 0;
    double latency_server_s = 0;
    double energy_j = 0;
    double local_gmac = 0;
    double tx_bytes = 0;
    double encoder_bytes = 0;
    double peak_local_bytes = 0;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// ConfigError if a profile is invalid.
MetricsRecord evaluate(const ExecutionPlan& plan, const EvalSetting& setting);

/// Plans and evaluates every config in order.
std::vector<MetricsRecord> run_all(const std::vector<ScenarioConfig>& configs, const SplitFixtures& fixtures,
                                   const EvalSetting& setting);

}  // namespace splitcomp::bench
