// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace splitcomp::codec {

SymbolHistogram SymbolHistogram::from_latents(std::span<const Tensor> latents, Index channels) {
    if (latents.empty()) throw InputError("fit: no latent samples");
    if (channels < 1) throw InputError("fit: channel count must be positive");
    SymbolHistogram h;
    h.counts.resize(static_cast<std::size_t>(channels));
    for (const Tensor& z : latents) {
        require_rank(z, 3, "fit latent");
        if (z.dim(0) != channels) {
            throw DimensionError("fit: latent has " + std::to_string(z.dim(0)) + " channels, expected " +
                                 std::to_string(channels));
        }
        if (!z.all_finite()) throw InputError("fit: non-finite latent");
        for (Index i = 0; i < z.size(); ++i) {
            h.counts[static_cast<std::size_t>(channel_of(z, i))][static_cast<std::int64_t>(std::round(z[i]))] += 1.0;
            h.total += 1.0;
        }
    }
    for (const auto& ch : h.counts) {
        if (ch.empty()) throw InputError("fit: a channel has no samples");
    }
    return h;
}

NllGradient nll_and_gradient(const EntropyModel& model, const SymbolHistogram& hist) {
    const Index C = model.channels();
    if (static_cast<Index>(hist.counts.size()) != C) throw DimensionError("nll: channel count mismatch");
    NllGradient g;
    g.d_loc = Eigen::VectorXd::Zero(C);
    g.d_log_scale = Eigen::VectorXd::Zero(C);
    const double norm = 1.0 / (hist.total * std::numbers::ln2);
    for (Index c = 0; c < C; ++c) {
        for (const auto& [k, n] : hist.counts[static_cast<std::size_t>(c)]) {
            const auto lm = log_mass_gradient(static_cast<double>(k), model.loc[c], model.log_scale[c]);
            g.nll_bits -= n * lm.value * norm;
            g.d_loc[c] -= n * lm.d_loc * norm;
            g.d_log_scale[c] -= n * lm.d_log_scale * norm;
        }
    }
    return g;
}

EntropyModel fit_entropy_model(std::span<const Tensor> latents, Index channels, int steps, double lr,
                               const FitOptions& options, FitReport* report) {
    if (steps < 0) throw ParameterError("fit: steps must be >= 0");
    if (!(lr > 0.0)) throw ParameterError("fit: learning rate must be > 0");
    const SymbolHistogram hist = SymbolHistogram::from_latents(latents, channels);

    EntropyModel model = EntropyModel::standard(channels, options.id);
    for (Index c = 0; c < channels; ++c) {
        double sum = 0.0, sq = 0.0, n = 0.0;
        for (const auto& [k, cnt] : hist.counts[static_cast<std::size_t>(c)]) {
            sum += cnt * static_cast<double>(k);
            sq += cnt * static_cast<double>(k) * static_cast<double>(k);
            n += cnt;
        }
        const double mean = sum / n;
        const double var = std::max(sq / n - mean * mean, 0.0);
        model.loc[c] = mean;
        model.log_scale[c] = std::clamp(std::log(std::max(std::sqrt(3.0 * var) / std::numbers::pi, 0.25)),
                                        options.min_log_scale, options.max_log_scale);
    }

    auto current = nll_and_gradient(model, hist);
    FitReport rep;
    rep.initial_nll_bits = current.nll_bits;
    for (int step = 0; step < steps; ++step) {
        double eta = lr;
        bool accepted = false;
        for (int bt = 0; bt <= options.max_backtracks; ++bt, eta *= 0.5) {
            EntropyModel trial = model;
            trial.loc -= eta * current.d_loc;
            trial.log_scale = (trial.log_scale - eta * current.d_log_scale)
                                  .cwiseMax(options.min_log_scale)
                                  .cwiseMin(options.max_log_scale);
            auto next = nll_and_gradient(trial, hist);
            if (next.nll_bits <= current.nll_bits) {
                model = std::move(trial);
                current = std::move(next);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        ++rep.accepted_steps;
    }
    rep.final_nll_bits = current.nll_bits;
    if (report) *report = rep;
    return model;
}

}  // namespace splitcomp::codec
