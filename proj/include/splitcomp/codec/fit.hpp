// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <vector>

#include "splitcomp/codec/entropy_model.hpp"

namespace splitcomp::codec {

/// Per-channel histogram of hard-rounded latent values.
struct SymbolHistogram {
    std::vector<std::map<std::int64_t, double>> counts;
    double total = 0.0;

    static SymbolHistogram from_latents(std::span<const Tensor> latents, Index channels);
};

/// Mean negative log-likelihood in bits per symbol of the histogram under the
/// logistic integral mass (no range clipping), with its gradient with respect
/// to loc and log_scale.
struct NllGradient {
    double nll_bits = 0.0;
    Eigen::VectorXd d_loc;
    Eigen::VectorXd d_log_scale;
};
NllGradient nll_and_gradient(const EntropyModel& model, const SymbolHistogram& hist);

struct FitOptions {
    std::uint16_t id = 0;
    double min_log_scale = -7.0;
    double max_log_scale = 9.0;
    int max_backtracks = 40;
};

struct FitReport {
    double initial_nll_bits = 0.0;
    double final_nll_bits = 0.0;
    int accepted_steps = 0;
};

/// Gradient descent on the mean NLL of hard-rounded latents. Starts from the
/// moment-matched logistic (loc = mean, scale = std * sqrt(3) / pi, floored
/// at 0.25) and halves the step until the objective does not increase, so the
/// final NLL never exceeds the initial one.
EntropyModel fit_entropy_model(std::span<const Tensor> latents, Index channels, int steps, double lr,
                               const FitOptions& options = {}, FitReport* report = nullptr);

}  // namespace splitcomp::codec
