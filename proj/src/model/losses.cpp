// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/model/losses.hpp"

#include <cmath>

#include "splitcomp/tensor_ops.hpp"

namespace splitcomp::model {

void DistillationPair::validate() const {
    if (teacher.size() != student.size()) {
        throw DimensionError("distillation pairs: " + std::to_string(teacher.size()) + " teacher vs " +
                             std::to_string(student.size()) + " student embeddings");
    }
    for (std::size_t i = 0; i < teacher.size(); ++i) {
        if (teacher[i].shape() != student[i].shape()) {
            throw DimensionError("distillation pair " + std::to_string(i) + ": shapes " +
                                 shape_to_string(teacher[i].shape()) + " and " + shape_to_string(student[i].shape()));
        }
    }
}

void KdConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("kd: alpha must lie in [0, 1]");
    if (!(tau > 0.0)) throw ParameterError("kd: tau must be positive");
}

void PolyLrSchedule::validate() const {
    if (!(eta0 > 0.0)) throw ParameterError("poly lr: eta0 must be positive");
    if (total_iters < 1) throw ParameterError("poly lr: total iterations must be positive");
    if (!(power > 0.0)) throw ParameterError("poly lr: power must be positive");
}

namespace {

void check_latent(const Tensor& latent, const codec::EntropyModel& model) {
    require_rank(latent, 3, "latent");
    if (latent.dim(0) != model.channels()) {
        throw DimensionError("latent has " + std::to_string(latent.dim(0)) + " channels, entropy model has " +
                             std::to_string(model.channels()));
    }
}

}  // namespace

double latent_nll_nats(const Tensor& latent, const codec::EntropyModel& model) {
    check_latent(latent, model);
    const Index plane = latent.dim(1) * latent.dim(2);
    double nll = 0;
    for (Index c = 0; c < latent.dim(0); ++c) {
        for (Index i = 0; i < plane; ++i) {
            nll -= codec::log_mass(latent[c * plane + i], model.loc[c], model.log_scale[c]);
        }
    }
    return nll;
}

LossWithGradient pretrain_loss(const DistillationPair& pairs, const Tensor& latent_noisy,
                               const codec::EntropyModel& model, double beta) {
    pairs.validate();
    if (!(beta >= 0.0)) throw ParameterError("pretrain loss: beta must be non-negative");
    check_latent(latent_noisy, model);

    LossWithGradient out;
    for (std::size_t i = 0; i < pairs.teacher.size(); ++i) {
        out.loss += (pairs.teacher[i].values() - pairs.student[i].values()).squaredNorm();
    }

    out.grad_latent = Tensor(latent_noisy.shape());
    const Index plane = latent_noisy.dim(1) * latent_noisy.dim(2);
    double rate = 0;
    for (Index c = 0; c < latent_noisy.dim(0); ++c) {
        for (Index i = 0; i < plane; ++i) {
            const Index k = c * plane + i;
            const auto g = codec::log_mass_gradient(latent_noisy[k], model.loc[c], model.log_scale[c]);
            rate -= g.value;
            out.grad_latent[k] = -beta * g.d_y;
        }
    }
    out.loss += beta * rate;
    return out;
}

double kd_kl(const Tensor& student_logits, const Tensor& teacher_logits, double tau) {
    if (student_logits.size() != teacher_logits.size()) throw DimensionError("kd: logit lengths differ");
    const Tensor log_s = log_softmax(student_logits, tau);
    const Tensor log_t = log_softmax(teacher_logits, tau);
    double kl = 0;
    for (Index k = 0; k < log_s.size(); ++k) kl += std::exp(log_s[k]) * (log_s[k] - log_t[k]);
    return std::max(kl, 0.0);
}

double kd_loss(const Tensor& student_logits, const Tensor& teacher_logits, Index label, const KdConfig& cfg) {
    cfg.validate();
    if (student_logits.size() != teacher_logits.size()) throw DimensionError("kd: logit lengths differ");
    if (label < 0 || label >= student_logits.size()) throw RangeError("kd: label out of range");
    const double ce = -log_softmax(student_logits, 1.0)[label];
    const double kl = kd_kl(student_logits, teacher_logits, cfg.tau);
    return cfg.alpha * ce + (1.0 - cfg.alpha) * cfg.tau * cfg.tau * kl;
}

double poly_lr(const PolyLrSchedule& sched, long t) {
    sched.validate();
    if (t < 0 || t > sched.total_iters) {
        throw RangeError("poly lr: iteration " + std::to_string(t) + " outside [0, " +
                         std::to_string(sched.total_iters) + "]");
    }
    const double frac = 1.0 - static_cast<double>(t) / static_cast<double>(sched.total_iters);
    return sched.eta0 * std::pow(frac, sched.power);
}

}  // namespace splitcomp::model
