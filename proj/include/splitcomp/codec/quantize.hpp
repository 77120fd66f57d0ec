// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "splitcomp/prng.hpp"
#include "splitcomp/tensor.hpp"

namespace splitcomp::codec {

enum class QuantizeMode { HardRound, NoiseSurrogate };

/// Rounding (inference) or additive Unif[-1/2, 1/2) noise (training surrogate).
struct Quantizer {
    QuantizeMode mode = QuantizeMode::HardRound;
    Prng noise{};

    static Quantizer hard() { return {QuantizeMode::HardRound, Prng{}}; }
    static Quantizer noisy(std::uint64_t seed) { return {QuantizeMode::NoiseSurrogate, Prng{seed}}; }
};

/// Nearest integer with ties away from zero, or x + eps with eps drawn in flat
/// order as uniform() - 0.5 from the quantizer's generator (advancing it).
Tensor quantize(const Tensor& x, Quantizer& q);

inline Tensor hard_round(const Tensor& x) {
    Quantizer q = Quantizer::hard();
    return quantize(x, q);
}

}  // namespace splitcomp::codec
