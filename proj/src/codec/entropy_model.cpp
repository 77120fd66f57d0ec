// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/entropy_model.hpp"

#include <algorithm>
#include <string>

#include "splitcomp/tensor_ops.hpp"

namespace splitcomp::codec {

EntropyModel EntropyModel::standard(Index channels, std::uint16_t id) {
    EntropyModel m;
    m.id = id;
    m.loc = Eigen::VectorXd::Zero(channels);
    m.log_scale = Eigen::VectorXd::Zero(channels);
    return m;
}

void EntropyModel::validate() const {
    if (loc.size() != log_scale.size()) throw ParameterError("entropy model: loc/log_scale length mismatch");
    if (loc.size() == 0) throw ParameterError("entropy model: zero channels");
    if (!loc.allFinite() || !log_scale.allFinite()) throw ParameterError("entropy model: non-finite parameters");
    if (min_symbol > max_symbol) throw ParameterError("entropy model: min_symbol > max_symbol");
    if (precision < 1 || precision > 16) throw ParameterError("entropy model: precision must be in [1, 16]");
    if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw ParameterError("entropy model: tail_mass must be in (0, 1)");
}

// With a = (y - 1/2 - loc)/s, b = (y + 1/2 - loc)/s and w = 1/s:
//   sigmoid(b) - sigmoid(a) = sigmoid(b) * sigmoid(-a) * (1 - exp(-w))
// which stays accurate deep in either tail.
double log_mass(double y, double loc, double log_scale) noexcept {
    const double w = std::exp(-log_scale);
    const double a = (y - 0.5 - loc) * w;
    const double b = (y + 0.5 - loc) * w;
    return log_sigmoid(b) + log_sigmoid(-a) + std::log(-std::expm1(-w));
}

LogMassGradient log_mass_gradient(double y, double loc, double log_scale) noexcept {
    const double w = std::exp(-log_scale);
    const double a = (y - 0.5 - loc) * w;
    const double b = (y + 0.5 - loc) * w;
    const double sig_a = sigmoid(a);
    const double sig_neg_b = sigmoid(-b);
    LogMassGradient g{};
    g.value = log_sigmoid(b) + log_sigmoid(-a) + std::log(-std::expm1(-w));
    g.d_y = (sig_neg_b - sig_a) * w;
    g.d_loc = -g.d_y;
    g.d_log_scale = a * sig_a - b * sig_neg_b - w / std::expm1(w);
    return g;
}

double escape_mass(const EntropyModel& model, Index channel) {
    const double w = std::exp(-model.log_scale[channel]);
    const double mu = model.loc[channel];
    const double below = sigmoid((model.min_symbol - 0.5 - mu) * w);
    const double above = sigmoid(-(model.max_symbol + 0.5 - mu) * w);
    return below + above;
}

double escape_coding_mass(const EntropyModel& model, Index channel) {
    return std::max(escape_mass(model, channel), model.tail_mass);
}

double pmf(const EntropyModel& model, Index channel, std::int64_t symbol) {
    if (channel < 0 || channel >= model.channels()) {
        throw RangeError("pmf: channel " + std::to_string(channel) + " out of range");
    }
    if (!model.in_range(symbol)) return escape_mass(model, channel);
    return std::exp(log_mass(static_cast<double>(symbol), model.loc[channel], model.log_scale[channel]));
}

}  // namespace splitcomp::codec
