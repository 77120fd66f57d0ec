// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/cdf_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace splitcomp::codec {

std::vector<std::uint32_t> quantize_pmf(std::span<const double> probs, int precision) {
    if (precision < 1 || precision > 31) throw ParameterError("quantize_pmf: precision must be in [1, 31]");
    const std::size_t n = probs.size();
    if (n == 0) throw InputError("quantize_pmf: empty distribution");
    const std::uint64_t total = std::uint64_t{1} << precision;
    if (n > total) {
        throw CapacityError("quantize_pmf: " + std::to_string(n) + " symbols exceed 2^" + std::to_string(precision) +
                            " counts");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("quantize_pmf: probabilities must be finite and >= 0");
        sum += p;
    }
    if (!(sum > 0.0)) throw InputError("quantize_pmf: probabilities sum to zero");

    std::vector<std::uint32_t> counts(n);
    std::vector<double> remainder(n);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double scaled = probs[i] / sum * static_cast<double>(total);
        const double whole = std::floor(scaled);
        counts[i] = static_cast<std::uint32_t>(std::max(whole, 1.0));
        remainder[i] = whole >= 1.0 ? scaled - whole : 0.0;
        assigned += counts[i];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::int64_t deficit = static_cast<std::int64_t>(total) - assigned;
    if (deficit > 0) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
        for (std::size_t k = 0; deficit > 0; ++k, --deficit) ++counts[order[k % n]];
    }
    while (deficit < 0) {
        // Surplus from the one-count floors: shave the largest counts, which
        // costs the least code length. Re-sort each round as counts change.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
        const std::uint32_t top = counts[order.front()];
        for (std::size_t k = 0; k < n && deficit < 0 && counts[order[k]] == top && top > 1; ++k) {
            --counts[order[k]];
            ++deficit;
        }
    }
    return counts;
}

CdfTable CdfTable::from_counts(std::span<const std::uint32_t> counts, int precision) {
    CdfTable t;
    t.precision = precision;
    t.cdf.resize(counts.size() + 1);
    t.cdf[0] = 0;
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) throw InputError("CdfTable: zero-frequency symbol");
        acc += counts[i];
        t.cdf[i + 1] = static_cast<std::uint32_t>(acc);
    }
    if (acc != (std::uint64_t{1} << precision)) throw InputError("CdfTable: counts do not sum to 2^precision");
    return t;
}

std::size_t CdfTable::find(std::uint32_t target) const {
    const auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), target);
    return static_cast<std::size_t>(it - cdf.begin()) - 1;
}

CdfTables build_cdf_tables(const EntropyModel& model) {
    model.validate();
    const Index n = model.alphabet_size() + 1;
    if (static_cast<std::uint64_t>(n) > (std::uint64_t{1} << model.precision)) {
        throw CapacityError("build_cdf_tables: alphabet of " + std::to_string(n) + " symbols does not fit precision " +
                            std::to_string(model.precision));
    }
    CdfTables tables;
    tables.min_symbol = model.min_symbol;
    tables.max_symbol = model.max_symbol;
    tables.channels.reserve(static_cast<std::size_t>(model.channels()));
    std::vector<double> probs(static_cast<std::size_t>(n));
    for (Index c = 0; c < model.channels(); ++c) {
        for (Index k = 0; k + 1 < n; ++k) probs[static_cast<std::size_t>(k)] = pmf(model, c, model.min_symbol + k);
        probs.back() = escape_coding_mass(model, c);
        tables.channels.push_back(CdfTable::from_probabilities(probs, model.precision));
    }
    return tables;
}

}  // namespace splitcomp::codec
