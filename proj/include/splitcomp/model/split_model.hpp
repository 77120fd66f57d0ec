// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "splitcomp/prng.hpp"
#include "splitcomp/tensor.hpp"

namespace splitcomp::model {

enum class Task : std::uint8_t { Classification = 0, Detection = 1, Segmentation = 2 };

inline constexpr std::array<Task, 3> kAllTasks{Task::Classification, Task::Detection, Task::Segmentation};

const char* task_name(Task t) noexcept;  // "IC", "OD", "SS"
Task parse_task(const std::string& name);  // throws TaskError

/// Set of tasks as the wire bitmask (bit0 IC, bit1 OD, bit2 SS).
class TaskSet {
public:
    constexpr TaskSet() = default;
    constexpr TaskSet(std::initializer_list<Task> tasks) {
        for (Task t : tasks) bits_ |= bit(t);
    }

    /// Throws TaskError if any bit outside the three known tasks is set.
    static TaskSet from_mask(std::uint8_t mask);
    static TaskSet all() { return {Task::Classification, Task::Detection, Task::Segmentation}; }

    constexpr bool contains(Task t) const noexcept { return (bits_ & bit(t)) != 0; }
    constexpr std::uint8_t mask() const noexcept { return bits_; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    int size() const noexcept;

    friend constexpr bool operator==(TaskSet, TaskSet) = default;

private:
    static constexpr std::uint8_t bit(Task t) noexcept { return static_cast<std::uint8_t>(1u << static_cast<int>(t)); }
    std::uint8_t bits_ = 0;
};

// Stage descriptions as they appear in the model definition file.
struct ConvStage {
    Index out_channels;
    Index kernel;
    Index stride = 1;
    Index padding = 0;
};
struct ReluStage {};
struct MaxPoolStage {
    Index kernel;
    Index stride;
};
struct ScaleStage {
    double factor;
};
using StageSpec = std::variant<ConvStage, ReluStage, MaxPoolStage, ScaleStage>;

struct ClassifierHeadSpec {
    Index classes = 10;
};
struct DetectorHeadSpec {
    Index max_boxes = 8;
    double score_threshold = 0.5;
};
struct SegmenterHeadSpec {
    Index classes = 4;
};

/// Everything needed to rebuild a SplitModel bit-identically.
struct ModelDefinition {
    std::string name = "toy";
    std::uint64_t seed = 0;
    std::uint16_t entropy_model_id = 0;
    Shape input_shape{3, 64, 64};
    std::vector<StageSpec> encoder;
    std::vector<StageSpec> decoder;
    std::vector<StageSpec> backbone;
    std::optional<ClassifierHeadSpec> classifier;
    std::optional<DetectorHeadSpec> detector;
    std::optional<SegmenterHeadSpec> segmenter;

    /// The documented default: 3-stage stride-2 conv encoder to a 16-channel
    /// latent at 1/8 resolution, one-conv decoder and backbone, all heads.
    static ModelDefinition toy(std::uint64_t seed = 0, Shape input_shape = {3, 64, 64});
};

std::string model_definition_to_json(const ModelDefinition& def);
ModelDefinition model_definition_from_json(const std::string& text);  // throws FormatError
ModelDefinition load_model_definition(const std::filesystem::path& path);

/// Outputs of the three heads. Detection scores are kept as float because
/// that is the precision carried on the wire.
struct Detection {
    std::array<float, 4> box;  // x0, y0, x1, y1 in input pixels
    float score;
    friend bool operator==(const Detection&, const Detection&) = default;
};

struct SegmentationMap {
    Index height = 0;
    Index width = 0;
    std::vector<std::uint16_t> classes;  // row-major
    friend bool operator==(const SegmentationMap&, const SegmentationMap&) = default;
};

struct Predictions {
    std::optional<Tensor> logits;
    std::optional<std::vector<Detection>> detections;
    std::optional<SegmentationMap> segmentation;
};

/// Per-invocation execution counters.
struct ForwardTrace {
    int encoder_runs = 0;
    int decoder_runs = 0;
    int backbone_runs = 0;
    std::array<int, 3> head_runs{0, 0, 0};

    int head(Task t) const { return head_runs[static_cast<std::size_t>(t)]; }
    ForwardTrace& operator+=(const ForwardTrace& o);
};

/// Multiply-accumulates and sizes of one section, for cost profiling.
struct SectionCost {
    std::string name;
    double macs = 0;
    double param_bytes = 0;
    double output_bytes = 0;
};

/// Encoder, decoder, shared backbone and task heads with seeded weights.
/// Immutable after construction; all member functions are const and
/// thread-safe.
class SplitModel {
public:
    explicit SplitModel(ModelDefinition def);

    const ModelDefinition& definition() const noexcept { return def_; }
    std::uint16_t entropy_model_id() const noexcept { return def_.entropy_model_id; }
    const Shape& input_shape() const noexcept { return def_.input_shape; }
    const Shape& latent_shape() const noexcept { return latent_shape_; }
    const Shape& feature_shape() const noexcept { return feature_shape_; }
    Index latent_channels() const noexcept { return latent_shape_[0]; }
    bool supports(Task t) const noexcept;

    /// Device side: encoder plus hard rounding. Counts one encoder run.
    Tensor encode(const Tensor& image, ForwardTrace* trace = nullptr) const;
    /// Encoder output before rounding.
    Tensor encoder_output(const Tensor& image) const;

    Tensor decode(const Tensor& latent, ForwardTrace* trace = nullptr) const;
    Tensor backbone(const Tensor& decoded, ForwardTrace* trace = nullptr) const;

    /// Server side: decoder and backbone once, then each requested head once.
    Predictions run_tail(const Tensor& latent, TaskSet tasks, ForwardTrace* trace = nullptr) const;

    Tensor classify(const Tensor& features, ForwardTrace* trace = nullptr) const;
    std::vector<Detection> detect(const Tensor& features, ForwardTrace* trace = nullptr) const;
    SegmentationMap segment(const Tensor& features, ForwardTrace* trace = nullptr) const;

    /// Head parameters, exposed so tests can check the zero-activation path.
    const Tensor& classifier_bias() const { return cls_b_; }

    std::vector<SectionCost> section_costs() const;

private:
    struct Layer {
        StageSpec spec;
        Tensor weights;
        Tensor bias;
    };

    static Tensor run_stages(const std::vector<Layer>& layers, Tensor x);
    std::vector<Layer> build_stages(const std::vector<StageSpec>& specs, Shape& shape, Prng& rng, double& macs,
                                    double& params) const;
    void check_task(Task t) const;

    ModelDefinition def_;
    std::vector<Layer> encoder_, decoder_, backbone_;
    Shape latent_shape_, decoded_shape_, feature_shape_;
    Tensor cls_w_, cls_b_, det_w_, det_b_, seg_w_, seg_b_;
    Index seg_upsample_ = 1;
    std::vector<SectionCost> costs_;
};

struct SplitResult {
    Tensor latent;
    Predictions predictions;
    ForwardTrace trace;
};

/// Nearest resize to the model's input shape and scaling of 0..255 pixels to
/// [0, 1]. One pipeline serves all tasks.
Tensor preprocess(const Tensor& raw_image, const Shape& input_shape);

/// Deterministic synthetic [3,H,W] image with 0..255 pixel values.
Tensor synthetic_image(std::uint64_t seed, Index height, Index width);

/// x -> z_hat -> predictions for the requested tasks, with one encoder run
/// and one decoder+backbone run whatever the task set. Unknown or
/// unsupported task -> TaskError.
SplitResult forward_split(const SplitModel& model, const Tensor& image, TaskSet tasks);

}  // namespace splitcomp::model
