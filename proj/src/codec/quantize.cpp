// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/quantize.hpp"

#include <cmath>

namespace splitcomp::codec {

Tensor quantize(const Tensor& x, Quantizer& q) {
    if (!x.all_finite()) throw InputError("quantize: non-finite input");
    Tensor out = x;
    if (q.mode == QuantizeMode::HardRound) {
        // std::round rounds halfway cases away from zero.
        out.values() = x.values().unaryExpr([](double v) { return std::round(v); });
    } else {
        for (Index i = 0; i < out.size(); ++i) out[i] += q.noise.uniform() - 0.5;
    }
    return out;
}

}  // namespace splitcomp::codec
