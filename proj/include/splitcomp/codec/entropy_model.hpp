// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <vector>

#include "splitcomp/tensor.hpp"

namespace splitcomp::codec {

/// Fixed cost of carrying one escaped value raw in the bypass section.
inline constexpr double kBypassBitsPerEscape = 32.0;

/// Per-channel logistic prior over integer latent symbols.
///
/// The mass of an in-range symbol k in channel c is the logistic integral
///   P(k) = sigmoid((k + 1/2 - loc_c) / s_c) - sigmoid((k - 1/2 - loc_c) / s_c),
/// with s_c = exp(log_scale_c). Whatever falls outside [min_symbol, max_symbol]
/// belongs to a single escape symbol; its table probability is floored at
/// `tail_mass` so outliers stay cheap to code.
struct EntropyModel {
    std::uint16_t id = 0;
    Eigen::VectorXd loc;
    Eigen::VectorXd log_scale;
    std::int32_t min_symbol = -127;
    std::int32_t max_symbol = 127;
    int precision = 16;
    double tail_mass = 0x1.0p-9;

    /// Zero-location, unit-scale prior with the default symbol range.
    static EntropyModel standard(Index channels, std::uint16_t id = 0);

    Index channels() const noexcept { return loc.size(); }
    Index alphabet_size() const noexcept { return static_cast<Index>(max_symbol) - min_symbol + 1; }
    bool in_range(std::int64_t k) const noexcept { return k >= min_symbol && k <= max_symbol; }
    double scale(Index c) const { return std::exp(log_scale[c]); }

    /// Throws ParameterError on inconsistent fields.
    void validate() const;

    friend bool operator==(const EntropyModel& a, const EntropyModel& b) {
        return a.id == b.id && a.min_symbol == b.min_symbol && a.max_symbol == b.max_symbol &&
               a.precision == b.precision && a.tail_mass == b.tail_mass && a.loc.size() == b.loc.size() &&
               a.log_scale.size() == b.log_scale.size() && a.loc == b.loc && a.log_scale == b.log_scale;
    }
};

/// Natural log of the logistic integral mass of the unit interval around `y`.
/// Defined for any real y, which gives the continuous relaxation used by the
/// training loss.
double log_mass(double y, double loc, double log_scale) noexcept;

/// d log_mass / d y, d loc, d log_scale.
struct LogMassGradient {
    double value;
    double d_y;
    double d_loc;
    double d_log_scale;
};
LogMassGradient log_mass_gradient(double y, double loc, double log_scale) noexcept;

/// Probability of in-range symbol k (the logistic integral mass). For an
/// out-of-range k the escape mass is returned.
double pmf(const EntropyModel& model, Index channel, std::int64_t symbol);

/// Mass of the logistic prior outside [min_symbol - 1/2, max_symbol + 1/2].
double escape_mass(const EntropyModel& model, Index channel);

/// Escape probability as charged by the coder: max(escape_mass, tail_mass).
double escape_coding_mass(const EntropyModel& model, Index channel);

/// Any prior that can price a symbol: `symbol_pmf(c, k)` for in-range symbols and
/// `escape_bits(c)` for everything else.
template <typename P>
concept SymbolPrior = requires(const P& p, Index c, std::int64_t k) {
    { p.channels() } -> std::convertible_to<Index>;
    { p.in_range(k) } -> std::convertible_to<bool>;
    { p.symbol_pmf(c, k) } -> std::convertible_to<double>;
    { p.escape_bits(c) } -> std::convertible_to<double>;
};

/// Adapter that prices symbols under an EntropyModel.
struct LogisticPrior {
    const EntropyModel& model;
    Index channels() const { return model.channels(); }
    bool in_range(std::int64_t k) const { return model.in_range(k); }
    double symbol_pmf(Index c, std::int64_t k) const { return pmf(model, c, k); }
    double escape_bits(Index c) const { return -std::log2(escape_coding_mass(model, c)) + kBypassBitsPerEscape; }
};

/// Explicit per-channel probabilities over [min_symbol, min_symbol + n).
/// Symbols outside the table are not representable (infinite cost).
struct TabulatedPrior {
    std::int64_t min_symbol = 0;
    std::vector<std::vector<double>> probabilities;

    Index channels() const { return static_cast<Index>(probabilities.size()); }
    bool in_range(std::int64_t k) const {
        return !probabilities.empty() && k >= min_symbol &&
               k < min_symbol + static_cast<std::int64_t>(probabilities.front().size());
    }
    double symbol_pmf(Index c, std::int64_t k) const {
        return probabilities[static_cast<std::size_t>(c)][static_cast<std::size_t>(k - min_symbol)];
    }
    double escape_bits(Index) const { return std::numeric_limits<double>::infinity(); }
};

/// Channel of flat element i in a [C,H,W] symbol tensor.
inline Index channel_of(const Tensor& symbols, Index i) {
    const Index plane = symbols.dim(1) * symbols.dim(2);
    return plane == 0 ? 0 : i / plane;
}

/// Ideal code length in bits: -sum log2 pmf(symbol). Escaped symbols are
/// charged escape_bits (table escape cost plus the 32-bit bypass).
template <SymbolPrior P>
double rate_bits(const Tensor& symbols, const P& prior) {
    require_rank(symbols, 3, "rate_bits symbols");
    if (symbols.dim(0) != prior.channels()) throw DimensionError("rate_bits: channel axis mismatch");
    double bits = 0.0;
    for (Index i = 0; i < symbols.size(); ++i) {
        const double v = symbols[i];
        if (v != std::round(v)) throw InputError("rate_bits: symbols must be integral");
        const auto k = static_cast<std::int64_t>(v);
        const Index c = channel_of(symbols, i);
        bits += prior.in_range(k) ? -std::log2(prior.symbol_pmf(c, k)) : prior.escape_bits(c);
    }
    return bits;
}

inline double rate_bits(const Tensor& symbols, const EntropyModel& model) {
    return rate_bits(symbols, LogisticPrior{model});
}

}  // namespace splitcomp::codec
