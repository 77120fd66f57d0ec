// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "splitcomp/prng.hpp"
#include "splitcomp/tensor.hpp"

namespace splitcomp {

/// 2-D cross-correlation of a [C,H,W] input with [K,C,kh,kw] weights.
/// Output is [K,H',W'] with H' = (H + 2*padding - kh)/stride + 1.
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Index stride, Index padding);

/// Number of multiply-accumulates conv2d_forward performs for these shapes.
double conv2d_macs(const Shape& input, const Shape& weights, Index stride, Index padding);

Tensor relu(const Tensor& x);

/// Max pooling over [C,H,W]; no padding, floor output size.
Tensor max_pool2d(const Tensor& x, Index kernel, Index stride);

/// Mean over H and W of a [C,H,W] tensor; returns [C].
Tensor global_avg_pool(const Tensor& x);

/// Nearest-neighbour upsampling of [C,H,W] by an integer factor.
Tensor upsample_nearest(const Tensor& x, Index factor);

/// weights [out,in] times x [in] plus bias [out].
Tensor linear(const Tensor& x, const Tensor& weights, const Tensor& bias);

/// Temperature softmax over a rank-1 tensor, max-subtracted.
Tensor softmax(const Tensor& logits, double temperature = 1.0);
Tensor log_softmax(const Tensor& logits, double temperature = 1.0);

/// Tensor with i.i.d. Unif[lo, hi) entries drawn from `rng` in flat order.
Tensor uniform_tensor(Shape shape, Prng& rng, double lo, double hi);

// Scalar logistic helpers shared by the codec and the losses.

inline double sigmoid(double x) noexcept {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow: -softplus(-x).
inline double log_sigmoid(double x) noexcept {
    if (x >= 0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

}  // namespace splitcomp
