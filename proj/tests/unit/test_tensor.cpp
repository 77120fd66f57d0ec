// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "splitcomp/prng.hpp"
#include "splitcomp/tensor_ops.hpp"

using namespace splitcomp;

namespace {

// Direct four-loop cross-correlation, independent of the im2col path.
Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, Index stride, Index pad) {
    const Index C = x.dim(0), H = x.dim(1), W = x.dim(2), K = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const Index Ho = (H + 2 * pad - kh) / stride + 1, Wo = (W + 2 * pad - kw) / stride + 1;
    Tensor y({K, Ho, Wo});
    for (Index k = 0; k < K; ++k)
        for (Index oh = 0; oh < Ho; ++oh)
            for (Index ow = 0; ow < Wo; ++ow) {
                double acc = b[k];
                for (Index c = 0; c < C; ++c)
                    for (Index i = 0; i < kh; ++i)
                        for (Index j = 0; j < kw; ++j) {
                            const Index ih = oh * stride + i - pad, iw = ow * stride + j - pad;
                            if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                            acc += x(c, ih, iw) * w[((k * C + c) * kh + i) * kw + j];
                        }
                y(k, oh, ow) = acc;
            }
    return y;
}

// Textbook stateful SplitMix64.
struct ReferenceSplitMix {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

}  // namespace

TEST_CASE("conv2d: zero input with zero bias gives zeros") {
    Prng rng(3);
    const Tensor w = uniform_tensor({2, 1, 2, 2}, rng, -1, 1);
    const Tensor y = conv2d_forward(Tensor::zeros({1, 3, 3}), w, Tensor::zeros({2}), 1, 0);
    CHECK(y.shape() == Shape{2, 2, 2});
    CHECK(y.values().isZero(0.0));
}

TEST_CASE("conv2d: identity 1x1 kernel returns the input") {
    Prng rng(5);
    const Tensor x = uniform_tensor({1, 4, 5}, rng, -3, 3);
    const Tensor y = conv2d_forward(x, Tensor({1, 1, 1, 1}, {1.0}), Tensor::zeros({1}), 1, 0);
    CHECK(y == x);
}

TEST_CASE("conv2d: 2x2 ones kernel stride 2 sums each block") {
    Tensor ramp({1, 4, 4});
    for (Index i = 0; i < 16; ++i) ramp[i] = static_cast<double>(i);
    const Tensor y = conv2d_forward(ramp, Tensor::constant({1, 1, 2, 2}, 1.0), Tensor::zeros({1}), 2, 0);
    // 0+1+4+5, 2+3+6+7, 8+9+12+13, 10+11+14+15
    CHECK(y == Tensor({1, 2, 2}, {10.0, 18.0, 42.0, 50.0}));
}

TEST_CASE("conv2d: matches the direct-summation oracle with stride and padding") {
    Prng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index C = rng.uniform_int(1, 3), K = rng.uniform_int(1, 4), k = rng.uniform_int(1, 3);
        const Index stride = rng.uniform_int(1, 2), pad = rng.uniform_int(0, 1);
        const Tensor x = uniform_tensor({C, rng.uniform_int(k, 7), rng.uniform_int(k, 7)}, rng, -1, 1);
        const Tensor w = uniform_tensor({K, C, k, k}, rng, -1, 1);
        const Tensor b = uniform_tensor({K}, rng, -1, 1);
        const Tensor got = conv2d_forward(x, w, b, stride, pad);
        const Tensor want = naive_conv(x, w, b, stride, pad);
        REQUIRE(got.shape() == want.shape());
        CHECK((got.values() - want.values()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("conv2d: linear in the input (zero bias)") {
    Prng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const Tensor x = uniform_tensor({2, 5, 6}, rng, -1, 1);
        const Tensor y = uniform_tensor({2, 5, 6}, rng, -1, 1);
        const Tensor w = uniform_tensor({3, 2, 3, 3}, rng, -1, 1);
        const Tensor zero = Tensor::zeros({3});
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        Tensor mix = x;
        mix.values() = a * x.values() + b * y.values();
        const Tensor lhs = conv2d_forward(mix, w, zero, 1, 1);
        const Tensor::Storage rhs = a * conv2d_forward(x, w, zero, 1, 1).values() + b * conv2d_forward(y, w, zero, 1, 1).values();
        CHECK((lhs.values() - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("conv2d: dimension errors name the axis") {
    const Tensor x = Tensor::zeros({2, 3, 3});
    CHECK_THROWS_WITH_AS(conv2d_forward(x, Tensor::zeros({1, 3, 1, 1}), Tensor::zeros({1}), 1, 0),
                         doctest::Contains("channel"), DimensionError);
    CHECK_THROWS_WITH_AS(conv2d_forward(x, Tensor::zeros({1, 2, 5, 1}), Tensor::zeros({1}), 1, 0),
                         doctest::Contains("height"), DimensionError);
    CHECK_THROWS_WITH_AS(conv2d_forward(x, Tensor::zeros({1, 2, 1, 5}), Tensor::zeros({1}), 1, 0),
                         doctest::Contains("width"), DimensionError);
    CHECK_THROWS_AS(conv2d_forward(x, Tensor::zeros({1, 2, 1, 1}), Tensor::zeros({2}), 1, 0), DimensionError);
    CHECK_THROWS_AS(conv2d_forward(x, Tensor::zeros({1, 2, 1, 1}), Tensor::zeros({1}), 0, 0), ParameterError);
}

TEST_CASE("softmax: closed forms") {
    const Tensor u = softmax(Tensor({4}, {0.3, 0.3, 0.3, 0.3}), 0.7);
    for (Index i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25).epsilon(1e-15));

    const Tensor logits({3}, {0.5, -1.0, 2.0});
    CHECK(softmax(logits, 1.0) == softmax(logits));

    const Tensor p = softmax(Tensor({2}, {2.0, 0.0}), 2.0);
    const double e = std::exp(1.0);
    CHECK(std::abs(p[0] - e / (e + 1.0)) < 1e-15);
    CHECK(std::abs(p[1] - 1.0 / (e + 1.0)) < 1e-15);
    CHECK(p[0] == doctest::Approx(0.73106).epsilon(1e-5));

    CHECK_THROWS_AS(softmax(logits, 0.0), ParameterError);
    CHECK_THROWS_AS(softmax(logits, -1.0), ParameterError);
}

TEST_CASE("softmax: positive and normalised for logits in [-50, 50]") {
    Prng rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        const Tensor logits = uniform_tensor({rng.uniform_int(1, 40)}, rng, -50, 50);
        const Tensor p = softmax(logits, rng.uniform(0.1, 5.0));
        CHECK((p.values().array() > 0.0).all());
        CHECK(std::abs(p.values().sum() - 1.0) <= 1e-12);
        CHECK(p.all_finite());
    }
}

TEST_CASE("log_softmax agrees with log of softmax") {
    const Tensor logits({3}, {1.0, 2.0, -4.0});
    const Tensor lp = log_softmax(logits, 1.5);
    const Tensor p = softmax(logits, 1.5);
    for (Index i = 0; i < 3; ++i) CHECK(lp[i] == doctest::Approx(std::log(p[i])).epsilon(1e-14));
}

TEST_CASE("prng: counter form reproduces reference SplitMix64") {
    ReferenceSplitMix ref{42};
    Prng rng(42);
    for (int i = 0; i < 1000; ++i) CHECK(rng.next_u64() == ref.next());
    CHECK(Prng(0).next_u64() == 0xE220A8397B1DCDAFULL);
    CHECK(Prng(7).at(500) == Prng(7, 500).next_u64());
}

TEST_CASE("prng: equal seeds give equal 10^6-element streams") {
    Prng a(1234), b(1234);
    bool same = true;
    for (int i = 0; i < 1'000'000; ++i) same &= (a.next_u64() == b.next_u64());
    CHECK(same);
    Prng c(1235);
    CHECK(c.next_u64() != Prng(1234).next_u64());
}

TEST_CASE("prng: uniform draws lie in [0, 1)") {
    Prng rng(9);
    double lo = 1, hi = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("pooling and upsampling shapes") {
    Tensor x({1, 4, 4});
    for (Index i = 0; i < 16; ++i) x[i] = static_cast<double>(i);
    CHECK(max_pool2d(x, 2, 2) == Tensor({1, 2, 2}, {5, 7, 13, 15}));
    CHECK(global_avg_pool(x) == Tensor({1}, {7.5}));
    const Tensor up = upsample_nearest(Tensor({1, 1, 2}, {1, 2}), 2);
    CHECK(up == Tensor({1, 2, 4}, {1, 1, 2, 2, 1, 1, 2, 2}));
}

TEST_CASE("tensor construction checks data length") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
    CHECK(Tensor::zeros({0, 3, 3}).empty());
}
