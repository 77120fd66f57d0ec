// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/model/split_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splitcomp/codec/quantize.hpp"
#include "splitcomp/tensor_ops.hpp"

namespace splitcomp::model {

const char* task_name(Task t) noexcept {
    switch (t) {
        case Task::Classification: return "IC";
        case Task::Detection: return "OD";
        case Task::Segmentation: return "SS";
    }
    return "?";
}

Task parse_task(const std::string& name) {
    for (Task t : kAllTasks) {
        if (name == task_name(t)) return t;
    }
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::toupper(c); });
    for (Task t : kAllTasks) {
        if (lower == task_name(t)) return t;
    }
    throw TaskError("unknown task '" + name + "' (expected IC, OD or SS)");
}

TaskSet TaskSet::from_mask(std::uint8_t mask) {
    if (mask & ~0x07u) throw TaskError("task bitmask has unknown bits set: " + std::to_string(mask));
    TaskSet s;
    s.bits_ = mask;
    return s;
}

int TaskSet::size() const noexcept { return std::popcount(bits_); }

ForwardTrace& ForwardTrace::operator+=(const ForwardTrace& o) {
    encoder_runs += o.encoder_runs;
    decoder_runs += o.decoder_runs;
    backbone_runs += o.backbone_runs;
    for (std::size_t i = 0; i < head_runs.size(); ++i) head_runs[i] += o.head_runs[i];
    return *this;
}

ModelDefinition ModelDefinition::toy(std::uint64_t seed, Shape input_shape) {
    ModelDefinition d;
    d.name = "toy-multitask";
    d.seed = seed;
    d.entropy_model_id = 1;
    d.input_shape = std::move(input_shape);
    d.encoder = {ConvStage{16, 5, 2, 2}, ReluStage{}, ConvStage{32, 5, 2, 2}, ReluStage{},
                 ConvStage{16, 3, 2, 1}, ScaleStage{4.0}};
    d.decoder = {ConvStage{32, 3, 1, 1}, ReluStage{}};
    d.backbone = {ConvStage{32, 3, 1, 1}, ReluStage{}};
    d.classifier = ClassifierHeadSpec{10};
    d.detector = DetectorHeadSpec{8, 0.5};
    d.segmenter = SegmenterHeadSpec{4};
    return d;
}

namespace {

using nlohmann::json;

json stages_to_json(const std::vector<StageSpec>& stages) {
    json arr = json::array();
    for (const auto& spec : stages) {
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, ConvStage>) {
                    arr.push_back({{"type", "conv"},
                                   {"out_channels", s.out_channels},
                                   {"kernel", s.kernel},
                                   {"stride", s.stride},
                                   {"padding", s.padding}});
                } else if constexpr (std::is_same_v<S, ReluStage>) {
                    arr.push_back({{"type", "relu"}});
                } else if constexpr (std::is_same_v<S, MaxPoolStage>) {
                    arr.push_back({{"type", "maxpool"}, {"kernel", s.kernel}, {"stride", s.stride}});
                } else {
                    arr.push_back({{"type", "scale"}, {"factor", s.factor}});
                }
            },
            spec);
    }
    return arr;
}

std::vector<StageSpec> stages_from_json(const json& arr) {
    std::vector<StageSpec> out;
    for (const auto& j : arr) {
        const auto type = j.at("type").get<std::string>();
        if (type == "conv") {
            out.push_back(ConvStage{j.at("out_channels").get<Index>(), j.at("kernel").get<Index>(),
                                    j.value("stride", Index{1}), j.value("padding", Index{0})});
        } else if (type == "relu") {
            out.push_back(ReluStage{});
        } else if (type == "maxpool") {
            out.push_back(MaxPoolStage{j.at("kernel").get<Index>(), j.at("stride").get<Index>()});
        } else if (type == "scale") {
            out.push_back(ScaleStage{j.at("factor").get<double>()});
        } else {
            throw FormatError("model definition: unknown stage type '" + type + "'");
        }
    }
    return out;
}

}  // namespace

std::string model_definition_to_json(const ModelDefinition& def) {
    json j;
    j["name"] = def.name;
    j["seed"] = def.seed;
    j["entropy_model_id"] = def.entropy_model_id;
    j["input_shape"] = def.input_shape;
    j["encoder"] = stages_to_json(def.encoder);
    j["decoder"] = stages_to_json(def.decoder);
    j["backbone"] = stages_to_json(def.backbone);
    json heads = json::object();
    if (def.classifier) heads["IC"] = {{"classes", def.classifier->classes}};
    if (def.detector) {
        heads["OD"] = {{"max_boxes", def.detector->max_boxes}, {"score_threshold", def.detector->score_threshold}};
    }
    if (def.segmenter) heads["SS"] = {{"classes", def.segmenter->classes}};
    j["heads"] = heads;
    return j.dump(2) + "\n";
}

ModelDefinition model_definition_from_json(const std::string& text) {
    ModelDefinition d;
    try {
        const json j = json::parse(text);
        d.name = j.value("name", d.name);
        d.seed = j.at("seed").get<std::uint64_t>();
        d.entropy_model_id = j.at("entropy_model_id").get<std::uint16_t>();
        d.input_shape = j.value("input_shape", d.input_shape);
        d.encoder = stages_from_json(j.at("encoder"));
        d.decoder = stages_from_json(j.value("decoder", json::array()));
        d.backbone = stages_from_json(j.value("backbone", json::array()));
        const json heads = j.value("heads", json::object());
        for (const auto& [key, h] : heads.items()) {
            switch (parse_task(key)) {
                case Task::Classification: d.classifier = ClassifierHeadSpec{h.value("classes", Index{10})}; break;
                case Task::Detection:
                    d.detector = DetectorHeadSpec{h.value("max_boxes", Index{8}), h.value("score_threshold", 0.5)};
                    break;
                case Task::Segmentation: d.segmenter = SegmenterHeadSpec{h.value("classes", Index{4})}; break;
            }
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("model definition: ") + e.what());
    } catch (const TaskError& e) {
        throw FormatError(std::string("model definition: ") + e.what());
    }
    return d;
}

ModelDefinition load_model_definition(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read model definition " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_definition_from_json(ss.str());
}

namespace {

constexpr double kBytesPerParam = 4.0;  // deployed weights are float32

// He-uniform weights; trunk biases start at zero so a zero image stays zero.
Tensor he_uniform(Shape shape, Index fan_in, Prng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(std::max<Index>(fan_in, 1)));
    return uniform_tensor(std::move(shape), rng, -bound, bound);
}

}  // namespace

std::vector<SplitModel::Layer> SplitModel::build_stages(const std::vector<StageSpec>& specs, Shape& shape, Prng& rng,
                                                        double& macs, double& params) const {
    std::vector<Layer> layers;
    for (const auto& spec : specs) {
        Layer layer{spec, {}, {}};
        if (const auto* conv = std::get_if<ConvStage>(&spec)) {
            if (conv->out_channels < 1 || conv->kernel < 1 || conv->stride < 1 || conv->padding < 0) {
                throw ParameterError("model: invalid conv stage");
            }
            const Index C = shape[0];
            const Shape wshape{conv->out_channels, C, conv->kernel, conv->kernel};
            layer.weights = he_uniform(wshape, C * conv->kernel * conv->kernel, rng);
            layer.bias = Tensor::zeros({conv->out_channels});
            macs += conv2d_macs(shape, wshape, conv->stride, conv->padding);
            params += static_cast<double>(layer.weights.size() + layer.bias.size());
            for (int axis = 1; axis <= 2; ++axis) {
                const Index padded = shape[axis] + 2 * conv->padding;
                if (conv->kernel > padded) {
                    throw DimensionError(std::string("model: conv kernel does not fit along ") +
                                         (axis == 1 ? "height" : "width"));
                }
                shape[axis] = (padded - conv->kernel) / conv->stride + 1;
            }
            shape[0] = conv->out_channels;
        } else if (const auto* pool = std::get_if<MaxPoolStage>(&spec)) {
            if (pool->kernel > shape[1] || pool->kernel > shape[2]) throw DimensionError("model: pool kernel too large");
            shape[1] = (shape[1] - pool->kernel) / pool->stride + 1;
            shape[2] = (shape[2] - pool->kernel) / pool->stride + 1;
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

Tensor SplitModel::run_stages(const std::vector<Layer>& layers, Tensor x) {
    for (const auto& layer : layers) {
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, ConvStage>) {
                    x = conv2d_forward(x, layer.weights, layer.bias, s.stride, s.padding);
                } else if constexpr (std::is_same_v<S, ReluStage>) {
                    x = relu(x);
                } else if constexpr (std::is_same_v<S, MaxPoolStage>) {
                    x = max_pool2d(x, s.kernel, s.stride);
                } else {
                    x.values() *= s.factor;
                }
            },
            layer.spec);
    }
    return x;
}

SplitModel::SplitModel(ModelDefinition def) : def_(std::move(def)) {
    if (def_.input_shape.size() != 3) throw DimensionError("model: input shape must be [C,H,W]");
    Prng rng(def_.seed);
    auto section = [&](const char* name, const std::vector<StageSpec>& specs, Shape& shape, std::vector<Layer>& out) {
        double macs = 0, params = 0;
        out = build_stages(specs, shape, rng, macs, params);
        costs_.push_back({name, macs, params * kBytesPerParam, static_cast<double>(shape_numel(shape)) * 4.0});
    };

    Shape shape = def_.input_shape;
    section("encoder", def_.encoder, shape, encoder_);
    latent_shape_ = shape;
    section("decoder", def_.decoder, shape, decoder_);
    decoded_shape_ = shape;
    section("backbone", def_.backbone, shape, backbone_);
    feature_shape_ = shape;

    const Index F = feature_shape_[0];
    const double cells = static_cast<double>(feature_shape_[1] * feature_shape_[2]);
    if (def_.classifier) {
        const Index K = def_.classifier->classes;
        cls_w_ = he_uniform({K, F}, F, rng);
        cls_b_ = uniform_tensor({K}, rng, -0.5, 0.5);
        costs_.push_back({"head:IC", static_cast<double>(K * F) + cells * F, (K * F + K) * kBytesPerParam,
                          static_cast<double>(K) * 4.0});
    }
    if (def_.detector) {
        det_w_ = he_uniform({5, F, 1, 1}, F, rng);
        det_b_ = uniform_tensor({5}, rng, -0.5, 0.5);
        costs_.push_back({"head:OD", 5.0 * F * cells, (5 * F + 5) * kBytesPerParam,
                          static_cast<double>(def_.detector->max_boxes) * 18.0});
    }
    if (def_.segmenter) {
        const Index K = def_.segmenter->classes;
        if (K > 65535) throw ParameterError("model: too many segmentation classes");
        seg_w_ = he_uniform({K, F, 1, 1}, F, rng);
        seg_b_ = uniform_tensor({K}, rng, -0.5, 0.5);
        if (feature_shape_[1] == 0 || def_.input_shape[1] % feature_shape_[1] != 0 ||
            def_.input_shape[2] / std::max<Index>(feature_shape_[2], 1) != def_.input_shape[1] / feature_shape_[1]) {
            throw DimensionError("model: segmentation head needs an integer, isotropic feature stride");
        }
        seg_upsample_ = def_.input_shape[1] / feature_shape_[1];
        costs_.push_back({"head:SS", static_cast<double>(K * F) * cells, (K * F + K) * kBytesPerParam,
                          static_cast<double>(shape_numel({def_.input_shape[1], def_.input_shape[2]})) * 2.0});
    }
}

bool SplitModel::supports(Task t) const noexcept {
    switch (t) {
        case Task::Classification: return def_.classifier.has_value();
        case Task::Detection: return def_.detector.has_value();
        case Task::Segmentation: return def_.segmenter.has_value();
    }
    return false;
}

void SplitModel::check_task(Task t) const {
    if (!supports(t)) throw TaskError(std::string("model has no head for task ") + task_name(t));
}

Tensor SplitModel::encoder_output(const Tensor& image) const {
    if (image.shape() != def_.input_shape) {
        throw DimensionError("image shape " + shape_to_string(image.shape()) + " does not match the model input " +
                             shape_to_string(def_.input_shape));
    }
    return run_stages(encoder_, image);
}

Tensor SplitModel::encode(const Tensor& image, ForwardTrace* trace) const {
    Tensor z = codec::hard_round(encoder_output(image));
    if (trace) ++trace->encoder_runs;
    return z;
}

Tensor SplitModel::decode(const Tensor& latent, ForwardTrace* trace) const {
    require_rank(latent, 3, "latent");
    if (latent.dim(0) != latent_shape_[0]) throw DimensionError("latent channel axis does not match the decoder");
    if (trace) ++trace->decoder_runs;
    return run_stages(decoder_, latent);
}

Tensor SplitModel::backbone(const Tensor& decoded, ForwardTrace* trace) const {
    if (trace) ++trace->backbone_runs;
    return run_stages(backbone_, decoded);
}

Tensor SplitModel::classify(const Tensor& features, ForwardTrace* trace) const {
    check_task(Task::Classification);
    if (trace) ++trace->head_runs[0];
    return linear(global_avg_pool(features), cls_w_, cls_b_);
}

std::vector<Detection> SplitModel::detect(const Tensor& features, ForwardTrace* trace) const {
    check_task(Task::Detection);
    if (trace) ++trace->head_runs[1];
    const Tensor raw = conv2d_forward(features, det_w_, det_b_, 1, 0);
    const Index H = raw.dim(1), W = raw.dim(2);
    const double cell_h = static_cast<double>(def_.input_shape[1]) / static_cast<double>(std::max<Index>(H, 1));
    const double cell_w = static_cast<double>(def_.input_shape[2]) / static_cast<double>(std::max<Index>(W, 1));

    struct Candidate {
        Detection det;
        Index cell;
    };
    std::vector<Candidate> found;
    for (Index h = 0; h < H; ++h) {
        for (Index w = 0; w < W; ++w) {
            const double score = sigmoid(raw(0, h, w));
            if (score < def_.detector->score_threshold) continue;
            const double cx = (static_cast<double>(w) + sigmoid(raw(1, h, w))) * cell_w;
            const double cy = (static_cast<double>(h) + sigmoid(raw(2, h, w))) * cell_h;
            const double bw = cell_w * std::exp(std::clamp(raw(3, h, w), -4.0, 4.0));
            const double bh = cell_h * std::exp(std::clamp(raw(4, h, w), -4.0, 4.0));
            Detection d{{static_cast<float>(cx - bw / 2), static_cast<float>(cy - bh / 2),
                         static_cast<float>(cx + bw / 2), static_cast<float>(cy + bh / 2)},
                        static_cast<float>(score)};
            found.push_back({d, h * W + w});
        }
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const Candidate& a, const Candidate& b) { return a.det.score > b.det.score; });
    std::vector<Detection> out;
    for (const auto& c : found) {
        if (static_cast<Index>(out.size()) >= def_.detector->max_boxes) break;
        out.push_back(c.det);
    }
    return out;
}

SegmentationMap SplitModel::segment(const Tensor& features, ForwardTrace* trace) const {
    check_task(Task::Segmentation);
    if (trace) ++trace->head_runs[2];
    const Tensor scores = upsample_nearest(conv2d_forward(features, seg_w_, seg_b_, 1, 0), seg_upsample_);
    SegmentationMap map;
    map.height = scores.dim(1);
    map.width = scores.dim(2);
    map.classes.resize(static_cast<std::size_t>(map.height * map.width));
    const Index K = scores.dim(0);
    for (Index h = 0; h < map.height; ++h) {
        for (Index w = 0; w < map.width; ++w) {
            Index best = 0;
            for (Index k = 1; k < K; ++k) {
                if (scores(k, h, w) > scores(best, h, w)) best = k;
            }
            map.classes[static_cast<std::size_t>(h * map.width + w)] = static_cast<std::uint16_t>(best);
        }
    }
    return map;
}

Predictions SplitModel::run_tail(const Tensor& latent, TaskSet tasks, ForwardTrace* trace) const {
    for (Task t : kAllTasks) {
        if (tasks.contains(t)) check_task(t);
    }
    const Tensor features = backbone(decode(latent, trace), trace);
    Predictions p;
    if (tasks.contains(Task::Classification)) p.logits = classify(features, trace);
    if (tasks.contains(Task::Detection)) p.detections = detect(features, trace);
    if (tasks.contains(Task::Segmentation)) p.segmentation = segment(features, trace);
    return p;
}

std::vector<SectionCost> SplitModel::section_costs() const { return costs_; }

Tensor preprocess(const Tensor& raw_image, const Shape& input_shape) {
    require_rank(raw_image, 3, "raw image");
    if (raw_image.dim(0) != input_shape[0]) throw DimensionError("preprocess: channel axis mismatch");
    if (raw_image.dim(1) == 0 || raw_image.dim(2) == 0) throw InputError("preprocess: empty image");
    Tensor out(input_shape);
    const Index H = input_shape[1], W = input_shape[2];
    for (Index c = 0; c < input_shape[0]; ++c)
        for (Index h = 0; h < H; ++h)
            for (Index w = 0; w < W; ++w) {
                const Index sh = h * raw_image.dim(1) / H, sw = w * raw_image.dim(2) / W;
                out(c, h, w) = raw_image(c, sh, sw) / 255.0;
            }
    return out;
}

Tensor synthetic_image(std::uint64_t seed, Index height, Index width) {
    Prng rng(seed);
    Tensor img({3, height, width});
    // Smooth gradient plus texture so the latent is not trivially constant.
    const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3);
    for (Index c = 0; c < 3; ++c)
        for (Index h = 0; h < height; ++h)
            for (Index w = 0; w < width; ++w) {
                const double base = 127.5 + 90.0 * std::sin(fx * w + fy * h + 2.1 * c);
                img(c, h, w) = std::clamp(std::round(base + rng.uniform(-30, 30)), 0.0, 255.0);
            }
    return img;
}

SplitResult forward_split(const SplitModel& model, const Tensor& image, TaskSet tasks) {
    SplitResult r;
    r.latent = model.encode(image, &r.trace);
    r.predictions = model.run_tail(r.latent, tasks, &r.trace);
    return r;
}

}  // namespace splitcomp::model
