// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitcomp/codec/entropy_model.hpp"

namespace splitcomp::codec {

/// Integer frequencies summing to exactly 2^precision, every entry >= 1.
///
/// Largest-remainder rounding: probabilities are normalised, scaled by
/// 2^precision and floored; zero counts are lifted to one. A positive
/// deficit is handed out one count at a time in order of decreasing
/// fractional part (lower index first on ties); a surplus created by the
/// one-count floors is taken back one count at a time from the largest
/// counts (lower index first on ties).
///
/// Throws CapacityError when probs.size() > 2^precision, InputError on
/// empty or non-positive-sum input.
std::vector<std::uint32_t> quantize_pmf(std::span<const double> probs, int precision);

/// Cumulative table for one channel: cdf[0] = 0, cdf[n] = 2^precision and
/// symbol i owns [cdf[i], cdf[i+1]).
struct CdfTable {
    int precision = 16;
    std::vector<std::uint32_t> cdf;

    static CdfTable from_counts(std::span<const std::uint32_t> counts, int precision);
    static CdfTable from_probabilities(std::span<const double> probs, int precision) {
        const auto counts = quantize_pmf(probs, precision);
        return from_counts(counts, precision);
    }

    std::size_t symbols() const noexcept { return cdf.size() - 1; }
    std::uint32_t total() const noexcept { return std::uint32_t{1} << precision; }
    std::uint32_t low(std::size_t i) const { return cdf[i]; }
    std::uint32_t freq(std::size_t i) const { return cdf[i + 1] - cdf[i]; }

    /// Index i with cdf[i] <= target < cdf[i+1].
    std::size_t find(std::uint32_t target) const;

    friend bool operator==(const CdfTable&, const CdfTable&) = default;
};

/// One table per channel. Symbol k maps to index k - min_symbol; the escape
/// symbol is the last index.
struct CdfTables {
    std::int32_t min_symbol = 0;
    std::int32_t max_symbol = 0;
    std::vector<CdfTable> channels;

    std::size_t escape_index() const noexcept { return static_cast<std::size_t>(max_symbol - min_symbol) + 1; }

    friend bool operator==(const CdfTables&, const CdfTables&) = default;
};

CdfTables build_cdf_tables(const EntropyModel& model);

}  // namespace splitcomp::codec
