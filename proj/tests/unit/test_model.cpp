// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "splitcomp/model/losses.hpp"
#include "splitcomp/model/split_model.hpp"
#include "splitcomp/tensor_ops.hpp"

using namespace splitcomp;
using namespace splitcomp::model;

namespace {

const SplitModel& toy_model() {
    static const SplitModel m(ModelDefinition::toy(7));
    return m;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("toy model shapes") {
    const auto& m = toy_model();
    CHECK(m.latent_shape() == Shape{16, 8, 8});
    CHECK(m.feature_shape() == Shape{32, 8, 8});
    CHECK(m.section_costs().size() == 6);
}

TEST_CASE("forward_split: zero image gives the classifier bias") {
    const auto& m = toy_model();
    const auto r = forward_split(m, Tensor::zeros(m.input_shape()), {Task::Classification});
    REQUIRE(r.predictions.logits);
    CHECK(*r.predictions.logits == m.classifier_bias());
    CHECK_FALSE(r.predictions.detections);
    CHECK_FALSE(r.predictions.segmentation);
    CHECK(r.latent.values().isZero());
}

TEST_CASE("forward_split: one encoder and backbone run for all three tasks") {
    const auto& m = toy_model();
    const Tensor img = preprocess(synthetic_image(3, 64, 64), m.input_shape());
    const auto r = forward_split(m, img, TaskSet::all());
    CHECK(r.trace.encoder_runs == 1);
    CHECK(r.trace.decoder_runs == 1);
    CHECK(r.trace.backbone_runs == 1);
    for (Task t : kAllTasks) CHECK(r.trace.head(t) == 1);
    REQUIRE(r.predictions.segmentation);
    CHECK(r.predictions.segmentation->height == 64);
    CHECK(r.predictions.segmentation->classes.size() == 64u * 64u);
    REQUIRE(r.predictions.detections);
    CHECK(r.predictions.detections->size() <= 8u);
    for (std::size_t i = 1; i < r.predictions.detections->size(); ++i) {
        CHECK((*r.predictions.detections)[i - 1].score >= (*r.predictions.detections)[i].score);
    }
}

TEST_CASE("forward_split: counters hold for every task subset") {
    const auto& m = toy_model();
    const Tensor img = preprocess(synthetic_image(4, 64, 64), m.input_shape());
    for (std::uint8_t mask = 0; mask < 8; ++mask) {
        const auto tasks = TaskSet::from_mask(mask);
        const auto r = forward_split(m, img, tasks);
        CHECK(r.trace.encoder_runs == 1);
        CHECK(r.trace.backbone_runs == 1);
        for (Task t : kAllTasks) CHECK(r.trace.head(t) == (tasks.contains(t) ? 1 : 0));
    }
}

TEST_CASE("forward_split: deterministic across calls and rebuilds") {
    const Tensor img = preprocess(synthetic_image(5, 64, 64), {3, 64, 64});
    const SplitModel a(ModelDefinition::toy(11)), b(ModelDefinition::toy(11));
    const auto ra = forward_split(a, img, TaskSet::all());
    const auto rb = forward_split(b, img, TaskSet::all());
    CHECK(ra.latent == rb.latent);
    CHECK(*ra.predictions.logits == *rb.predictions.logits);
    CHECK(*ra.predictions.detections == *rb.predictions.detections);
    CHECK(*ra.predictions.segmentation == *rb.predictions.segmentation);
    CHECK(ra.latent.values().array().round().matrix() == ra.latent.values());
}

TEST_CASE("tasks: unknown ids and missing heads") {
    CHECK_THROWS_AS(TaskSet::from_mask(0x08), TaskError);
    CHECK_THROWS_AS(parse_task("XX"), TaskError);
    CHECK(parse_task("od") == Task::Detection);
    ModelDefinition d = ModelDefinition::toy(1);
    d.detector.reset();
    const SplitModel m(d);
    CHECK_THROWS_AS(forward_split(m, Tensor::zeros(m.input_shape()), {Task::Detection}), TaskError);
    CHECK_THROWS_AS(forward_split(m, Tensor::zeros({3, 32, 32}), {Task::Classification}), DimensionError);
}

TEST_CASE("model definition JSON round trip") {
    const ModelDefinition d = ModelDefinition::toy(99);
    const ModelDefinition back = model_definition_from_json(model_definition_to_json(d));
    CHECK(model_definition_to_json(back) == model_definition_to_json(d));
    const SplitModel a(d), b(back);
    const Tensor img = preprocess(synthetic_image(1, 64, 64), a.input_shape());
    CHECK(a.encode(img) == b.encode(img));
    CHECK_THROWS_AS(model_definition_from_json("{\"seed\": 1}"), FormatError);
    CHECK_THROWS_AS(model_definition_from_json(R"({"seed":1,"entropy_model_id":1,"encoder":[{"type":"fft"}]})"),
                    FormatError);
}

TEST_CASE("pretrain loss reductions") {
    Prng rng(31);
    const Tensor h = uniform_tensor({4, 3, 3}, rng, -1, 1);
    const Tensor latent = uniform_tensor({2, 2, 4}, rng, -3, 3);
    const auto em = codec::EntropyModel::standard(2);

    CHECK(pretrain_loss({{h}, {h}}, latent, em, 0.0).loss == 0.0);

    const Tensor g = uniform_tensor({4, 3, 3}, rng, -1, 1);
    double sse = 0;
    for (Index i = 0; i < h.size(); ++i) sse += (h[i] - g[i]) * (h[i] - g[i]);
    CHECK(pretrain_loss({{h}, {g}}, latent, em, 0.0).loss == doctest::Approx(sse).epsilon(1e-12));

    const double with_rate = pretrain_loss({{h}, {g}}, latent, em, 2.0).loss;
    CHECK(with_rate == doctest::Approx(sse + 2.0 * latent_nll_nats(latent, em)).epsilon(1e-12));
    CHECK(with_rate >= sse);

    CHECK_THROWS_AS(pretrain_loss({{h}, {latent}}, latent, em, 1.0), DimensionError);
    CHECK_THROWS_AS(pretrain_loss({{h, h}, {h}}, latent, em, 1.0), DimensionError);
}

TEST_CASE("pretrain loss rate gradient matches central differences on a 16-element latent") {
    Prng rng(32);
    auto em = codec::EntropyModel::standard(2);
    em.loc << 0.4, -1.2;
    em.log_scale << 0.3, 1.1;
    const DistillationPair none{};
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor z = uniform_tensor({2, 2, 4}, rng, -6, 6);
        const double beta = rng.uniform(0.1, 5);
        const auto r = pretrain_loss(none, z, em, beta);
        Eigen::VectorXd numeric(z.size());
        const double h = 1e-6;
        for (Index k = 0; k < z.size(); ++k) {
            Tensor plus = z, minus = z;
            plus[k] += h;
            minus[k] -= h;
            numeric[k] = (pretrain_loss(none, plus, em, beta).loss - pretrain_loss(none, minus, em, beta).loss) / (2 * h);
        }
        const double rel = (r.grad_latent.values() - numeric).norm() / std::max(numeric.norm(), 1e-12);
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("kd loss closed forms") {
    const Tensor s({2}, {2.0, 0.0}), t({2}, {0.0, 2.0});
    const double p = logistic(2.0), q = logistic(-2.0);
    const double ce = -std::log(p);
    const double kl = p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q));
    CHECK(ce == doctest::Approx(0.12693).epsilon(1e-4));
    CHECK(kd_loss(s, t, 0, {0.5, 1.0}) == doctest::Approx(0.5 * ce + 0.5 * kl).epsilon(1e-12));
    CHECK(kd_loss(s, t, 0, {1.0, 1.0}) == doctest::Approx(ce).epsilon(1e-12));
    CHECK(kd_loss(s, s, 0, {0.3, 2.0}) == doctest::Approx(0.3 * ce).epsilon(1e-12));
    CHECK(kd_loss(s, t, 0, {0.0, 3.0}) == doctest::Approx(9.0 * kd_kl(s, t, 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(kd_loss(s, t, 0, {0.5, 0.0}), ParameterError);
    CHECK_THROWS_AS(kd_loss(s, t, 2, {0.5, 1.0}), RangeError);
}

TEST_CASE("kd loss is continuous in alpha") {
    Prng rng(33);
    const Tensor s = uniform_tensor({5}, rng, -3, 3), t = uniform_tensor({5}, rng, -3, 3);
    double prev = kd_loss(s, t, 1, {0.0, 1.5});
    for (int i = 1; i <= 1000; ++i) {
        const double cur = kd_loss(s, t, 1, {i / 1000.0, 1.5});
        CHECK(std::abs(cur - prev) < 0.05);
        prev = cur;
    }
}

TEST_CASE("poly lr schedule") {
    const PolyLrSchedule sched{0.1, 1000, 0.9};
    CHECK(poly_lr(sched, 0) == 0.1);
    CHECK(poly_lr(sched, 1000) == 0.0);
    CHECK(poly_lr(sched, 500) == doctest::Approx(0.1 * 0.53589).epsilon(1e-5));
    CHECK(poly_lr(sched, 500) == doctest::Approx(0.1 * std::pow(0.5, 0.9)).epsilon(1e-15));
    double prev = poly_lr(sched, 0);
    for (long t = 1; t <= 1000; ++t) {
        const double cur = poly_lr(sched, t);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK_THROWS_AS(poly_lr(sched, 1001), RangeError);
    CHECK_THROWS_AS(poly_lr(sched, -1), RangeError);
}
