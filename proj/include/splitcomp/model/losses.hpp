// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "splitcomp/codec/entropy_model.hpp"
#include "splitcomp/tensor.hpp"

namespace splitcomp::model {

/// Teacher and student embeddings compared pairwise.
struct DistillationPair {
    std::vector<Tensor> teacher;
    std::vector<Tensor> student;

    /// Throws DimensionError on a count or shape mismatch.
    void validate() const;
};

struct KdConfig {
    double alpha = 0.5;
    double tau = 1.0;

    void validate() const;  // ParameterError
};

struct PolyLrSchedule {
    double eta0 = 1.0;
    long total_iters = 1;
    double power = 0.9;

    void validate() const;  // ParameterError
};

struct LossWithGradient {
    double loss = 0;
    Tensor grad_latent;  // gradient of the rate term only
};

/// Sum of squared embedding distances minus beta times the natural-log
/// likelihood of the noisy latent under the logistic integral-mass prior.
LossWithGradient pretrain_loss(const DistillationPair& pairs, const Tensor& latent_noisy,
                               const codec::EntropyModel& model, double beta);

/// -sum log p(latent) in nats, the rate term alone.
double latent_nll_nats(const Tensor& latent, const codec::EntropyModel& model);

double kd_loss(const Tensor& student_logits, const Tensor& teacher_logits, Index label, const KdConfig& cfg);

/// KL(softmax(s/tau) || softmax(t/tau)) in nats.
double kd_kl(const Tensor& student_logits, const Tensor& teacher_logits, double tau);

/// eta0 * (1 - t/N)^power; RangeError outside [0, N].
double poly_lr(const PolyLrSchedule& sched, long t);

}  // namespace splitcomp::model
