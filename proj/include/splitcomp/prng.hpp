// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace splitcomp {

/// Counter-based 64-bit generator (SplitMix64 in counter form).
///
///   output(seed, n) = mix(seed + (n + 1) * 0x9E3779B97F4A7C15)
///   mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///           return z ^ (z >> 31)
///
/// The stream starting at position 0 is bit-identical to the reference
/// SplitMix64 sequence seeded with `seed`, so any implementation of that
/// generator reproduces it. Position is addressable: `at(n)` does not
/// depend on earlier draws.
class Prng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit Prng(std::uint64_t seed = 0, std::uint64_t position = 0) noexcept
        : seed_(seed), position_(position) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t at(std::uint64_t position) const noexcept { return mix(seed_ + (position + 1) * kGamma); }

    std::uint64_t next_u64() noexcept { return at(position_++); }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive); modulo bias is below 2^-40 for
    /// the small ranges used here.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return position_; }

    /// Independent child stream; children of distinct ids never overlap in practice.
    Prng split(std::uint64_t stream_id) const noexcept { return Prng(mix(seed_ ^ mix(stream_id + kGamma)), 0); }

private:
    std::uint64_t seed_;
    std::uint64_t position_;
};

}  // namespace splitcomp
