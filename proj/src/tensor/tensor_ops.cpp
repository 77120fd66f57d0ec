// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/tensor_ops.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace splitcomp {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {

Index conv_out_extent(Index in, Index kernel, Index stride, Index padding, const char* axis) {
    const Index padded = in + 2 * padding;
    if (kernel > padded) {
        throw DimensionError(std::string("conv2d: kernel does not fit padded input along ") + axis + " (kernel " +
                             std::to_string(kernel) + ", padded extent " + std::to_string(padded) + ")");
    }
    return (padded - kernel) / stride + 1;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Index stride, Index padding) {
    if (stride < 1) throw ParameterError("conv2d: stride must be >= 1");
    if (padding < 0) throw ParameterError("conv2d: padding must be >= 0");
    require_rank(input, 3, "conv2d input");
    require_rank(weights, 4, "conv2d weights");
    require_rank(bias, 1, "conv2d bias");

    const Index C = input.dim(0), H = input.dim(1), W = input.dim(2);
    const Index K = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    if (weights.dim(1) != C) {
        throw DimensionError("conv2d: channel axis mismatch (input " + std::to_string(C) + ", weights " +
                             std::to_string(weights.dim(1)) + ")");
    }
    if (bias.dim(0) != K) {
        throw DimensionError("conv2d: output-channel axis mismatch (weights " + std::to_string(K) + ", bias " +
                             std::to_string(bias.dim(0)) + ")");
    }
    const Index Ho = conv_out_extent(H, kh, stride, padding, "height");
    const Index Wo = conv_out_extent(W, kw, stride, padding, "width");

    // im2col: one column per output pixel, rows ordered (c, i, j) to match the
    // row-major weight layout so the product is a single GEMM.
    const Index patch = C * kh * kw;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(patch, Ho * Wo);
    for (Index c = 0; c < C; ++c) {
        for (Index i = 0; i < kh; ++i) {
            for (Index j = 0; j < kw; ++j) {
                const Index row = (c * kh + i) * kw + j;
                for (Index oh = 0; oh < Ho; ++oh) {
                    const Index ih = oh * stride + i - padding;
                    if (ih < 0 || ih >= H) continue;
                    for (Index ow = 0; ow < Wo; ++ow) {
                        const Index iw = ow * stride + j - padding;
                        if (iw < 0 || iw >= W) continue;
                        cols(row, oh * Wo + ow) = input(c, ih, iw);
                    }
                }
            }
        }
    }

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> kernel(weights.values().data(), K, patch);
    RowMajor out = kernel * cols;
    out.colwise() += bias.values();

    Tensor result({K, Ho, Wo});
    Eigen::Map<RowMajor>(result.values().data(), K, Ho * Wo) = out;
    return result;
}

double conv2d_macs(const Shape& input, const Shape& weights, Index stride, Index padding) {
    const Index Ho = (input[1] + 2 * padding - weights[2]) / stride + 1;
    const Index Wo = (input[2] + 2 * padding - weights[3]) / stride + 1;
    return static_cast<double>(weights[0]) * static_cast<double>(Ho * Wo) *
           static_cast<double>(weights[1] * weights[2] * weights[3]);
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    y.values() = y.values().cwiseMax(0.0);
    return y;
}

Tensor max_pool2d(const Tensor& x, Index kernel, Index stride) {
    require_rank(x, 3, "max_pool2d input");
    if (kernel < 1 || stride < 1) throw ParameterError("max_pool2d: kernel and stride must be >= 1");
    const Index C = x.dim(0), H = x.dim(1), W = x.dim(2);
    if (kernel > H) throw DimensionError("max_pool2d: kernel exceeds height");
    if (kernel > W) throw DimensionError("max_pool2d: kernel exceeds width");
    const Index Ho = (H - kernel) / stride + 1, Wo = (W - kernel) / stride + 1;
    Tensor y({C, Ho, Wo});
    for (Index c = 0; c < C; ++c)
        for (Index oh = 0; oh < Ho; ++oh)
            for (Index ow = 0; ow < Wo; ++ow) {
                double m = -std::numeric_limits<double>::infinity();
                for (Index i = 0; i < kernel; ++i)
                    for (Index j = 0; j < kernel; ++j) m = std::max(m, x(c, oh * stride + i, ow * stride + j));
                y(c, oh, ow) = m;
            }
    return y;
}

Tensor global_avg_pool(const Tensor& x) {
    require_rank(x, 3, "global_avg_pool input");
    const Index C = x.dim(0);
    Tensor y({C});
    const Index plane = x.dim(1) * x.dim(2);
    if (plane == 0) return y;
    for (Index c = 0; c < C; ++c) y[c] = x.channel(c).mean();
    return y;
}

Tensor upsample_nearest(const Tensor& x, Index factor) {
    require_rank(x, 3, "upsample_nearest input");
    if (factor < 1) throw ParameterError("upsample_nearest: factor must be >= 1");
    const Index C = x.dim(0), H = x.dim(1), W = x.dim(2);
    Tensor y({C, H * factor, W * factor});
    for (Index c = 0; c < C; ++c)
        for (Index h = 0; h < H * factor; ++h)
            for (Index w = 0; w < W * factor; ++w) y(c, h, w) = x(c, h / factor, w / factor);
    return y;
}

Tensor linear(const Tensor& x, const Tensor& weights, const Tensor& bias) {
    require_rank(x, 1, "linear input");
    require_rank(weights, 2, "linear weights");
    require_rank(bias, 1, "linear bias");
    if (weights.dim(1) != x.dim(0)) throw DimensionError("linear: input axis mismatch");
    if (weights.dim(0) != bias.dim(0)) throw DimensionError("linear: output axis mismatch");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> w(weights.values().data(), weights.dim(0), weights.dim(1));
    return Tensor({weights.dim(0)}, Tensor::Storage(w * x.values() + bias.values()));
}

Tensor log_softmax(const Tensor& logits, double temperature) {
    require_rank(logits, 1, "softmax logits");
    if (!(temperature > 0.0)) throw ParameterError("softmax: temperature must be > 0");
    if (logits.size() == 0) throw InputError("softmax: empty logits");
    const Eigen::ArrayXd scaled = logits.values().array() / temperature;
    const double m = scaled.maxCoeff();
    const double lse = m + std::log((scaled - m).exp().sum());
    return Tensor(logits.shape(), Tensor::Storage((scaled - lse).matrix()));
}

Tensor softmax(const Tensor& logits, double temperature) {
    require_rank(logits, 1, "softmax logits");
    if (!(temperature > 0.0)) throw ParameterError("softmax: temperature must be > 0");
    if (logits.size() == 0) throw InputError("softmax: empty logits");
    const Eigen::ArrayXd scaled = logits.values().array() / temperature;
    const Eigen::ArrayXd e = (scaled - scaled.maxCoeff()).exp();
    return Tensor(logits.shape(), Tensor::Storage((e / e.sum()).matrix()));
}

Tensor uniform_tensor(Shape shape, Prng& rng, double lo, double hi) {
    Tensor t(std::move(shape));
    for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace splitcomp
