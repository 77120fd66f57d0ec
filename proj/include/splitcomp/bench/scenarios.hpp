// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "splitcomp/model/split_model.hpp"

namespace splitcomp::bench {

using model::Task;

/// One row of the baseline roster. Sizes are decimal megabytes as
/// published, stored in bytes.
struct BaselineModelSpec {
    int index;
    std::string name;
    double params;
    double size_bytes;
    std::array<int, 3> input_shape;  // "320+"-style shapes use their minimum
    Task task;
    double gmac;                     // fixture, not published with the roster
};

/// The nine local-computing baselines, indices 1..9.
const std::vector<BaselineModelSpec>& baseline_models();
const BaselineModelSpec& baseline_model(int index);  // ConfigError

enum class PlanKind { LocalCompute, SharedEncoderSC, LadonSC };

const char* kind_label(PlanKind k) noexcept;  // "LC", "SC", "Ours"

struct ScenarioConfig {
    std::string id;  // "LC 1", "SC 6", "Ours 10"
    PlanKind kind = PlanKind::LocalCompute;
    int number = 0;
    std::array<int, 3> lc_models{0, 0, 0};  // IC, OD, SS roster indices (LC only)
    std::optional<double> beta;
    int variant = 0;       // SC: 1..6
    std::string backbone;  // Ours: "ResNet-50" or "ResNeSt-269e"
};

inline constexpr std::array<double, 6> kScBetaGrid{0.32, 0.64, 1.28, 2.56, 5.12, 10.24};
inline constexpr std::array<double, 5> kLadonBetaGrid{0.32, 1.28, 5.12, 10.24, 20.48};
inline constexpr double kResNet50EncoderBytes = 0.543e6;
inline constexpr double kResNeStEncoderBytes = 0.935e6;

/// 24 LC rows (IC index fastest, then OD, then SS), 6 SC rows, 10 Ours rows.
std::vector<ScenarioConfig> enumerate_configs();

const ScenarioConfig& find_config(const std::vector<ScenarioConfig>& configs, const std::string& id);  // ConfigError

/// 100 * encoder bytes / sum of the member model sizes. ConfigError for
/// non-LC configs.
double encoder_fraction(const ScenarioConfig& config, double encoder_bytes);

struct StageCost {
    double gmac = 0;
    double param_bytes = 0;
    double output_bytes = 0;
};

struct LadonFixture {
    std::string backbone;
    StageCost encoder;
    StageCost decoder_backbone;
    std::array<StageCost, 3> heads;
    std::vector<double> payload_bytes;  // aligned with kLadonBetaGrid
};

/// Placeholder costs for the split models. Only relative behaviour is
/// meaningful; none of these numbers are published measurements.
struct SplitFixtures {
    StageCost preprocess;
    std::array<StageCost, 3> sc_encoder;      // per task, one shared encoder module
    std::array<StageCost, 3> sc_tail;         // per task decoder+backbone+head
    std::array<std::vector<double>, 3> sc_payload_bytes;  // per task, aligned with kScBetaGrid
    LadonFixture resnet50;
    LadonFixture resnest269e;
    bool sc_single_encode = false;  // alternative SC reading: encode once, send three payloads

    const LadonFixture& ladon(const std::string& backbone) const;  // ConfigError
    /// Replace every SC and Ours per-task payload with `bytes`.
    void set_uniform_payload(double bytes);
};

SplitFixtures default_fixtures();

/// Configs, roster-independent fixtures, and the evaluation setting.
struct ScenarioFile {
    std::vector<ScenarioConfig> configs;
    SplitFixtures fixtures;
};

std::string scenario_to_json(const ScenarioFile& s);
ScenarioFile scenario_from_json(const std::string& text);  // FormatError / ConfigError
ScenarioFile load_scenario(const std::filesystem::path& path);

}  // namespace splitcomp::bench
