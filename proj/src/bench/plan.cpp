// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/bench/plan.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "splitcomp/error.hpp"

namespace splitcomp::bench {

using cost::Placement;

const char* role_name(StageRole r) noexcept {
    switch (r) {
        case StageRole::Preprocess: return "preprocess";
        case StageRole::Encoder: return "encoder";
        case StageRole::FullModel: return "model";
        case StageRole::Tail: return "tail";
        case StageRole::DecoderBackbone: return "decoder+backbone";
        case StageRole::Head: return "head";
    }
    return "?";
}

int ExecutionPlan::uplink_messages() const {
    return static_cast<int>(
        std::count_if(steps.begin(), steps.end(), [](const PlanStep& s) { return s.kind == PlanStep::Kind::Uplink; }));
}

int ExecutionPlan::count(StageRole role, Placement where) const {
    return static_cast<int>(std::count_if(steps.begin(), steps.end(), [&](const PlanStep& s) {
        return s.kind == PlanStep::Kind::Compute && s.role == role && s.stage.placement == where;
    }));
}

namespace {

PlanStep compute(StageRole role, std::string module, std::string name, const StageCost& c, Placement where) {
    PlanStep s;
    s.kind = PlanStep::Kind::Compute;
    s.role = role;
    s.module = std::move(module);
    s.stage = {std::move(name), c.gmac, c.param_bytes, c.output_bytes, where};
    return s;
}

PlanStep uplink(std::string name, double bytes) {
    PlanStep s;
    s.kind = PlanStep::Kind::Uplink;
    s.stage.name = std::move(name);
    s.bytes = bytes;
    return s;
}

template <std::size_t N>
std::size_t beta_index(const std::array<double, N>& grid, double beta, const std::string& id) {
    for (std::size_t i = 0; i < N; ++i) {
        if (std::abs(grid[i] - beta) <= 1e-9 * grid[i]) return i;
    }
    throw ConfigError(id + ": beta " + std::to_string(beta) + " has no payload fixture");
}

}  // namespace

ExecutionPlan plan(const ScenarioConfig& config, const SplitFixtures& fx) {
    ExecutionPlan p;
    p.scenario_id = config.id;
    p.kind = config.kind;
    p.beta = config.beta;

    switch (config.kind) {
        case PlanKind::LocalCompute:
            for (std::size_t t = 0; t < 3; ++t) {
                const auto& m = baseline_model(config.lc_models[t]);
                const double input_bytes = 4.0 * m.input_shape[0] * m.input_shape[1] * m.input_shape[2];
                p.steps.push_back(compute(StageRole::FullModel, m.name, m.name,
                                          {m.gmac, m.size_bytes, input_bytes}, Placement::Local));
            }
            break;

        case PlanKind::SharedEncoderSC: {
            if (config.variant < 1 || config.variant > static_cast<int>(kScBetaGrid.size())) {
                throw ConfigError(config.id + ": SC variant out of range");
            }
            const auto v = static_cast<std::size_t>(config.variant - 1);
            for (Task task : model::kAllTasks) {
                const auto t = static_cast<std::size_t>(task);
                const std::string tag = model::task_name(task);
                if (!fx.sc_single_encode || t == 0) {
                    p.steps.push_back(compute(StageRole::Preprocess, "preprocess", "preprocess:" + tag, fx.preprocess,
                                              Placement::Local));
                    p.steps.push_back(compute(StageRole::Encoder, "sc-encoder", "encoder:" + tag, fx.sc_encoder[t],
                                              Placement::Local));
                }
                p.steps.push_back(uplink("latent:" + tag, fx.sc_payload_bytes[t].at(v)));
                p.steps.push_back(compute(StageRole::Tail, "sc-tail:" + tag, "tail:" + tag, fx.sc_tail[t],
                                          Placement::Remote));
            }
            break;
        }

        case PlanKind::LadonSC: {
            const LadonFixture& l = fx.ladon(config.backbone);
            if (!config.beta) throw ConfigError(config.id + ": Ours configs need a beta");
            const auto b = beta_index(kLadonBetaGrid, *config.beta, config.id);
            p.steps.push_back(
                compute(StageRole::Preprocess, "preprocess", "preprocess", fx.preprocess, Placement::Local));
            p.steps.push_back(
                compute(StageRole::Encoder, "ladon-encoder", "encoder", l.encoder, Placement::Local));
            p.steps.push_back(uplink("latent", l.payload_bytes.at(b)));
            p.steps.push_back(compute(StageRole::DecoderBackbone, "ladon-trunk", "decoder+backbone",
                                      l.decoder_backbone, Placement::Remote));
            for (Task task : model::kAllTasks) {
                const std::string tag = model::task_name(task);
                p.steps.push_back(compute(StageRole::Head, "ladon-head:" + tag, "head:" + tag,
                                          l.heads[static_cast<std::size_t>(task)], Placement::Remote));
            }
            break;
        }
    }
    return p;
}

MetricsRecord evaluate(const ExecutionPlan& plan, const EvalSetting& s) {
    s.mobile.validate();
    s.server.validate();
    s.channel.validate();

    MetricsRecord r;
    r.scenario_id = plan.scenario_id;
    r.kind = kind_label(plan.kind);
    r.beta = plan.beta;

    std::vector<cost::UtilizationSegment> schedule;
    std::set<std::string> resident, encoders;
    double max_output = 0;

    for (const auto& step : plan.steps) {
        double duration = 0, utilization = 0;
        if (step.kind == PlanStep::Kind::Uplink) {
            duration = cost::tx_time(step.bytes, s.channel);
            r.latency_tx_s += duration;
            r.tx_bytes += step.bytes;
        } else if (step.stage.placement == Placement::Local) {
            duration = cost::stage_latency(step.stage, s.mobile, s.mobile_mode);
            r.latency_local_s += duration;
            r.local_gmac += step.stage.gmac;
            if (duration > 0) utilization = step.stage.gmac / duration;
            if (resident.insert(step.module).second) r.peak_local_bytes += step.stage.param_bytes;
            if (step.role == StageRole::Encoder && encoders.insert(step.module).second) {
                r.encoder_bytes += step.stage.param_bytes;
            }
            max_output = std::max(max_output, step.stage.output_bytes);
        } else {
            // The mobile device idles while the server works.
            duration = cost::stage_latency(step.stage, s.server, s.server_mode);
            r.latency_server_s += duration;
        }
        if (duration > 0) schedule.push_back({duration, utilization});
    }
    r.peak_local_bytes += max_output;
    r.latency_s = r.latency_local_s + r.latency_tx_s + r.latency_server_s;
    r.energy_j = schedule.empty() ? 0.0 : cost::measured_energy(s.mobile, schedule, s.measurement);
    return r;
}

std::vector<MetricsRecord> run_all(const std::vector<ScenarioConfig>& configs, const SplitFixtures& fixtures,
                                   const EvalSetting& setting) {
    std::vector<MetricsRecord> out;
    out.reserve(configs.size());
    for (const auto& c : configs) out.push_back(evaluate(plan(c, fixtures), setting));
    return out;
}

}  // namespace splitcomp::bench
