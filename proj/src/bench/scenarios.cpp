// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/bench/scenarios.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splitcomp/error.hpp"

namespace splitcomp::bench {

namespace {
constexpr double MB = 1e6;
}

const std::vector<BaselineModelSpec>& baseline_models() {
    // GMAC column is a fixture at the listed input shape.
    static const std::vector<BaselineModelSpec> roster{
        {1, "MobileNetV3 Large 1.0", 5.5e6, 21.0 * MB, {3, 224, 224}, Task::Classification, 0.22},
        {2, "MobileNetV2", 3.5e6, 13.5 * MB, {3, 224, 224}, Task::Classification, 0.30},
        {3, "MNASNet 1.3", 6.3e6, 24.2 * MB, {3, 224, 224}, Task::Classification, 0.53},
        {4, "MNASNet 0.5", 2.2e6, 8.5 * MB, {3, 224, 224}, Task::Classification, 0.11},
        {5, "SSD300 w/ VGG-16", 35.6e6, 136.0 * MB, {3, 300, 300}, Task::Detection, 34.9},
        {6, "SSDLite w/ MNv3", 5.2e6, 20.0 * MB, {3, 320, 320}, Task::Detection, 0.58},
        {7, "Faster R-CNN w/ MNv3 + FPN", 19.4e6, 74.1 * MB, {3, 320, 320}, Task::Detection, 0.72},
        {8, "DeepLabv3 w/ MNv3", 11.0e6, 42.2 * MB, {3, 416, 416}, Task::Segmentation, 10.45},
        {9, "LRASPP w/ MNv3", 3.2e6, 12.4 * MB, {3, 416, 416}, Task::Segmentation, 2.09},
    };
    return roster;
}

const BaselineModelSpec& baseline_model(int index) {
    const auto& roster = baseline_models();
    if (index < 1 || index > static_cast<int>(roster.size())) {
        throw ConfigError("no baseline model with index " + std::to_string(index));
    }
    return roster[static_cast<std::size_t>(index - 1)];
}

const char* kind_label(PlanKind k) noexcept {
    switch (k) {
        case PlanKind::LocalCompute: return "LC";
        case PlanKind::SharedEncoderSC: return "SC";
        case PlanKind::LadonSC: return "Ours";
    }
    return "?";
}

std::vector<ScenarioConfig> enumerate_configs() {
    std::vector<ScenarioConfig> out;
    for (int k = 0; k < 24; ++k) {
        ScenarioConfig c;
        c.kind = PlanKind::LocalCompute;
        c.number = k + 1;
        c.id = "LC " + std::to_string(c.number);
        c.lc_models = {k % 4 + 1, (k / 4) % 3 + 5, k / 12 + 8};
        out.push_back(c);
    }
    for (int v = 1; v <= 6; ++v) {
        ScenarioConfig c;
        c.kind = PlanKind::SharedEncoderSC;
        c.number = v;
        c.id = "SC " + std::to_string(v);
        c.variant = v;
        c.beta = kScBetaGrid[static_cast<std::size_t>(v - 1)];
        out.push_back(c);
    }
    for (int n = 1; n <= 10; ++n) {
        ScenarioConfig c;
        c.kind = PlanKind::LadonSC;
        c.number = n;
        c.id = "Ours " + std::to_string(n);
        c.backbone = n <= 5 ? "ResNet-50" : "ResNeSt-269e";
        c.beta = kLadonBetaGrid[static_cast<std::size_t>((n - 1) % 5)];
        out.push_back(c);
    }
    return out;
}

const ScenarioConfig& find_config(const std::vector<ScenarioConfig>& configs, const std::string& id) {
    for (const auto& c : configs) {
        if (c.id == id) return c;
    }
    throw ConfigError("unknown scenario '" + id + "'");
}

double encoder_fraction(const ScenarioConfig& config, double encoder_bytes) {
    if (config.kind != PlanKind::LocalCompute) {
        throw ConfigError("encoder fraction is defined for LC configs only, got " + config.id);
    }
    double total = 0;
    for (int idx : config.lc_models) total += baseline_model(idx).size_bytes;
    return 100.0 * encoder_bytes / total;
}

const LadonFixture& SplitFixtures::ladon(const std::string& backbone) const {
    if (backbone == resnet50.backbone) return resnet50;
    if (backbone == resnest269e.backbone) return resnest269e;
    throw ConfigError("no Ladon fixture for backbone '" + backbone + "'");
}

void SplitFixtures::set_uniform_payload(double bytes) {
    for (auto& v : sc_payload_bytes) std::fill(v.begin(), v.end(), bytes);
    std::fill(resnet50.payload_bytes.begin(), resnet50.payload_bytes.end(), bytes);
    std::fill(resnest269e.payload_bytes.begin(), resnest269e.payload_bytes.end(), bytes);
}

SplitFixtures default_fixtures() {
    SplitFixtures f;
    f.preprocess = {0.01, 0, 3.0 * 224 * 224 * 4};
    // One shared ResNet-50 bottleneck encoder run at each task's own input size.
    f.sc_encoder = {StageCost{0.59, kResNet50EncoderBytes, 12.0 * 28 * 28 * 4},
                    StageCost{1.69, kResNet50EncoderBytes, 12.0 * 50 * 50 * 4},
                    StageCost{1.51, kResNet50EncoderBytes, 12.0 * 52 * 52 * 4}};
    f.sc_tail = {StageCost{3.6, 90e6, 4000}, StageCost{86.0, 160e6, 4000}, StageCost{138.0, 160e6, 416.0 * 416 * 2}};
    f.sc_payload_bytes = {std::vector<double>{8600, 7100, 5800, 4700, 3800, 3100},
                          std::vector<double>{15800, 13000, 10600, 8600, 7000, 5700},
                          std::vector<double>{13200, 10900, 8900, 7200, 5900, 4800}};
    f.resnet50 = {"ResNet-50",
                  {0.59, kResNet50EncoderBytes, 12.0 * 28 * 28 * 4},
                  {3.5, 94e6, 2048.0 * 7 * 7 * 4},
                  {StageCost{0.002, 8.2e6, 4000}, StageCost{70.0, 75e6, 4000}, StageCost{60.0, 65e6, 416.0 * 416 * 2}},
                  {9400, 6300, 4100, 3300, 2700}};
    f.resnest269e = {"ResNeSt-269e",
                     {1.18, kResNeStEncoderBytes, 12.0 * 28 * 28 * 4},
                     {37.0, 440e6, 2048.0 * 7 * 7 * 4},
                     {StageCost{0.002, 8.2e6, 4000}, StageCost{70.0, 75e6, 4000},
                      StageCost{60.0, 65e6, 416.0 * 416 * 2}},
                     {10200, 6900, 4500, 3600, 2900}};
    return f;
}

namespace {

using nlohmann::json;

json cost_json(const StageCost& c) {
    return {{"gmac", c.gmac}, {"param_bytes", c.param_bytes}, {"output_bytes", c.output_bytes}};
}

StageCost cost_from(const json& j) {
    StageCost c{j.at("gmac").get<double>(), j.value("param_bytes", 0.0), j.value("output_bytes", 0.0)};
    if (c.gmac < 0 || c.param_bytes < 0 || c.output_bytes < 0) throw ConfigError("stage costs must be non-negative");
    return c;
}

json per_task(const std::array<StageCost, 3>& a) {
    return {{"IC", cost_json(a[0])}, {"OD", cost_json(a[1])}, {"SS", cost_json(a[2])}};
}

std::array<StageCost, 3> per_task_from(const json& j) {
    return {cost_from(j.at("IC")), cost_from(j.at("OD")), cost_from(j.at("SS"))};
}

json ladon_json(const LadonFixture& l) {
    return {{"backbone", l.backbone},
            {"encoder", cost_json(l.encoder)},
            {"decoder_backbone", cost_json(l.decoder_backbone)},
            {"heads", per_task(l.heads)},
            {"payload_bytes", l.payload_bytes}};
}

LadonFixture ladon_from(const json& j) {
    LadonFixture l{j.at("backbone").get<std::string>(), cost_from(j.at("encoder")),
                   cost_from(j.at("decoder_backbone")), per_task_from(j.at("heads")),
                   j.at("payload_bytes").get<std::vector<double>>()};
    if (l.payload_bytes.size() != kLadonBetaGrid.size()) {
        throw ConfigError("Ladon payload_bytes must have one entry per beta in the grid");
    }
    return l;
}

PlanKind kind_from(const std::string& s) {
    if (s == "LC") return PlanKind::LocalCompute;
    if (s == "SC") return PlanKind::SharedEncoderSC;
    if (s == "Ours") return PlanKind::LadonSC;
    throw ConfigError("unknown scenario kind '" + s + "'");
}

}  // namespace

std::string scenario_to_json(const ScenarioFile& s) {
    json configs = json::array();
    for (const auto& c : s.configs) {
        json j{{"id", c.id}, {"kind", kind_label(c.kind)}};
        switch (c.kind) {
            case PlanKind::LocalCompute:
                j["models"] = {{"IC", c.lc_models[0]}, {"OD", c.lc_models[1]}, {"SS", c.lc_models[2]}};
                break;
            case PlanKind::SharedEncoderSC: j["variant"] = c.variant; break;
            case PlanKind::LadonSC: j["backbone"] = c.backbone; break;
        }
        if (c.beta) j["beta"] = *c.beta;
        configs.push_back(j);
    }
    const auto& f = s.fixtures;
    json sc_payload;
    for (Task t : model::kAllTasks) sc_payload[model::task_name(t)] = f.sc_payload_bytes[static_cast<std::size_t>(t)];
    json fixtures{{"preprocess", cost_json(f.preprocess)},
                  {"sc_encoder", per_task(f.sc_encoder)},
                  {"sc_tail", per_task(f.sc_tail)},
                  {"sc_payload_bytes", sc_payload},
                  {"sc_single_encode", f.sc_single_encode},
                  {"ladon", json::array({ladon_json(f.resnet50), ladon_json(f.resnest269e)})}};
    return json{{"configs", configs}, {"fixtures", fixtures}}.dump(2) + "\n";
}

ScenarioFile scenario_from_json(const std::string& text) {
    ScenarioFile s;
    try {
        const json j = json::parse(text);
        for (const auto& cj : j.at("configs")) {
            ScenarioConfig c;
            c.id = cj.at("id").get<std::string>();
            c.kind = kind_from(cj.at("kind").get<std::string>());
            const auto space = c.id.find_last_of(' ');
            c.number = space == std::string::npos ? 0 : std::atoi(c.id.c_str() + space + 1);
            if (cj.contains("beta")) c.beta = cj.at("beta").get<double>();
            switch (c.kind) {
                case PlanKind::LocalCompute: {
                    const auto& m = cj.at("models");
                    c.lc_models = {m.at("IC").get<int>(), m.at("OD").get<int>(), m.at("SS").get<int>()};
                    for (std::size_t t = 0; t < 3; ++t) {
                        if (baseline_model(c.lc_models[t]).task != static_cast<Task>(t)) {
                            throw ConfigError(c.id + ": model " + std::to_string(c.lc_models[t]) + " does not serve " +
                                              model::task_name(static_cast<Task>(t)));
                        }
                    }
                    break;
                }
                case PlanKind::SharedEncoderSC:
                    c.variant = cj.at("variant").get<int>();
                    if (c.variant < 1 || c.variant > static_cast<int>(kScBetaGrid.size())) {
                        throw ConfigError(c.id + ": SC variant out of range");
                    }
                    break;
                case PlanKind::LadonSC:
                    c.backbone = cj.at("backbone").get<std::string>();
                    if (!c.beta) throw ConfigError(c.id + ": Ours configs need a beta");
                    break;
            }
            s.configs.push_back(c);
        }
        if (j.contains("fixtures")) {
            const auto& fj = j.at("fixtures");
            auto& f = s.fixtures;
            f.preprocess = cost_from(fj.at("preprocess"));
            f.sc_encoder = per_task_from(fj.at("sc_encoder"));
            f.sc_tail = per_task_from(fj.at("sc_tail"));
            for (Task t : model::kAllTasks) {
                auto& v = f.sc_payload_bytes[static_cast<std::size_t>(t)];
                v = fj.at("sc_payload_bytes").at(model::task_name(t)).get<std::vector<double>>();
                if (v.size() != kScBetaGrid.size()) throw ConfigError("sc_payload_bytes needs one entry per SC variant");
            }
            f.sc_single_encode = fj.value("sc_single_encode", false);
            const auto& ladon = fj.at("ladon");
            if (ladon.size() != 2) throw ConfigError("expected two Ladon fixtures");
            f.resnet50 = ladon_from(ladon.at(0));
            f.resnest269e = ladon_from(ladon.at(1));
        } else {
            s.fixtures = default_fixtures();
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scenario file: ") + e.what());
    }
    return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

}  // namespace splitcomp::bench
