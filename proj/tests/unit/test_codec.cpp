// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "splitcomp/codec/bitstream.hpp"
#include "splitcomp/codec/cdf_table.hpp"
#include "splitcomp/codec/entropy_model.hpp"
#include "splitcomp/codec/entropy_model_io.hpp"
#include "splitcomp/codec/quantize.hpp"
#include "splitcomp/codec/symbol_file.hpp"
#include "splitcomp/tensor_ops.hpp"

using namespace splitcomp;
using namespace splitcomp::codec;

namespace {

double plain_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

EntropyModel random_model(Prng& rng, Index channels) {
    EntropyModel m = EntropyModel::standard(channels, static_cast<std::uint16_t>(rng.uniform_int(0, 65535)));
    for (Index c = 0; c < channels; ++c) {
        m.loc[c] = rng.uniform(-20, 20);
        m.log_scale[c] = rng.uniform(std::log(0.5), std::log(20.0));
    }
    return m;
}

Tensor random_symbols(Prng& rng, const EntropyModel& m, Shape shape) {
    Tensor t(std::move(shape));
    const Index plane = t.dim(1) * t.dim(2);
    for (Index i = 0; i < t.size(); ++i) {
        const Index c = i / plane;
        // Inverse-CDF draw from the logistic, rounded and clipped into range.
        const double u = std::clamp(rng.uniform(), 1e-12, 1 - 1e-12);
        const double v = m.loc[c] + m.scale(c) * std::log(u / (1 - u));
        t[i] = std::clamp(std::round(v), double(m.min_symbol), double(m.max_symbol));
    }
    return t;
}

}  // namespace

TEST_CASE("quantize: hard round") {
    CHECK(hard_round(Tensor::zeros({2, 2, 2})) == Tensor::zeros({2, 2, 2}));
    CHECK(hard_round(Tensor({3}, {1.4, -1.4, 0.5})) == Tensor({3}, {1.0, -1.0, 1.0}));
    CHECK(hard_round(Tensor({2}, {-0.5, -2.5})) == Tensor({2}, {-1.0, -3.0}));
    Tensor bad({1}, {std::nan("")});
    CHECK_THROWS_AS(hard_round(bad), InputError);
}

TEST_CASE("quantize: noise surrogate replays the documented stream") {
    Quantizer q = Quantizer::noisy(42);
    const Tensor out = quantize(Tensor::zeros({5}), q);
    // Independent replay: SplitMix64 from state 42, top 53 bits, minus 1/2.
    std::uint64_t state = 42;
    for (Index i = 0; i < 5; ++i) {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        const double expected = static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
        CHECK(out[i] == expected);
        CHECK(out[i] >= -0.5);
        CHECK(out[i] < 0.5);
    }
}

TEST_CASE("quantize: noise stays strictly within half a unit over 10^6 samples") {
    Prng rng(1);
    const Tensor x = uniform_tensor({1'000'000}, rng, -100, 100);
    Quantizer q = Quantizer::noisy(7);
    const Tensor y = quantize(x, q);
    CHECK((y.values() - x.values()).cwiseAbs().maxCoeff() < 0.5);
}

TEST_CASE("pmf: logistic integral mass") {
    const EntropyModel m = EntropyModel::standard(1);
    const double want = 2.0 * plain_sigmoid(0.5) - 1.0;
    CHECK(std::abs(pmf(m, 0, 0) - want) < 1e-15);
    CHECK(pmf(m, 0, 0) == doctest::Approx(0.244918).epsilon(1e-6));
    for (int k = 1; k < 127; ++k) CHECK(std::abs(pmf(m, 0, k) - pmf(m, 0, -k)) < 1e-17);
    CHECK_THROWS_AS(pmf(m, 1, 0), RangeError);
}

TEST_CASE("pmf: in-range mass plus escape mass is one") {
    Prng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        EntropyModel m = random_model(rng, 1);
        m.log_scale[0] = rng.uniform(-2, 5);
        m.loc[0] = rng.uniform(-150, 150);
        double total = escape_mass(m, 0);
        for (int k = m.min_symbol; k <= m.max_symbol; ++k) total += pmf(m, 0, k);
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("rate_bits: closed forms") {
    TabulatedPrior uniform{0, {std::vector<double>(256, 1.0 / 256)}};
    Tensor sym({1, 10, 10});
    for (Index i = 0; i < sym.size(); ++i) sym[i] = static_cast<double>((i * 37) % 256);
    CHECK(rate_bits(sym, uniform) == doctest::Approx(800.0).epsilon(1e-12));

    TabulatedPrior certain{5, {{1.0}}};
    CHECK(rate_bits(Tensor::constant({1, 3, 3}, 5.0), certain) == 0.0);

    const EntropyModel m = EntropyModel::standard(1);
    const double p0 = plain_sigmoid(0.5) - plain_sigmoid(-0.5);
    const double p1 = plain_sigmoid(1.5) - plain_sigmoid(0.5);
    CHECK(p1 == doctest::Approx(0.195115).epsilon(1e-6));
    const double want = -std::log2(p0) - 2.0 * std::log2(p1);
    CHECK(rate_bits(Tensor({1, 1, 3}, {0.0, 1.0, -1.0}), m) == doctest::Approx(want).epsilon(1e-13));

    // Escapes pay the table escape cost plus the 32-bit bypass.
    const double esc = -std::log2(escape_coding_mass(m, 0)) + 32.0;
    CHECK(rate_bits(Tensor({1, 1, 1}, {500.0}), m) == doctest::Approx(esc));
    CHECK(esc == doctest::Approx(9.0 + 32.0).epsilon(1e-9));

    CHECK_THROWS_AS(rate_bits(Tensor({1, 1, 1}, {0.5}), m), InputError);
}

TEST_CASE("quantize_pmf: largest-remainder rounding") {
    const std::vector<double> equal{0.5, 0.5};
    CHECK(quantize_pmf(equal, 16) == std::vector<std::uint32_t>{32768, 32768});

    const std::vector<double> skew{0.9, 0.1};
    const CdfTable t = CdfTable::from_probabilities(skew, 16);
    // 58982.4 -> 58982, 6553.6 -> 6553, the spare count goes to the larger remainder.
    CHECK(t.cdf == std::vector<std::uint32_t>{0, 58982, 65536});

    const std::vector<double> tiny{1.0, 1e-12, 1e-12};
    const auto counts = quantize_pmf(tiny, 4);
    CHECK(counts == std::vector<std::uint32_t>{14, 1, 1});

    const std::vector<double> many(17, 1.0);
    CHECK_THROWS_AS(quantize_pmf(many, 4), CapacityError);
}

TEST_CASE("build_cdf_tables: sound and deterministic") {
    Prng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        EntropyModel m = random_model(rng, 3);
        m.log_scale[1] = -3.0;   // near point mass
        m.loc[2] = 300.0;        // almost all mass escapes
        const CdfTables a = build_cdf_tables(m);
        CHECK(a == build_cdf_tables(m));
        for (const auto& t : a.channels) {
            REQUIRE(t.symbols() == 256);
            CHECK(t.cdf.front() == 0);
            CHECK(t.cdf.back() == 65536);
            bool increasing = true;
            for (std::size_t i = 0; i + 1 < t.cdf.size(); ++i) increasing &= t.cdf[i] < t.cdf[i + 1];
            CHECK(increasing);
        }
    }
}

TEST_CASE("build_cdf_tables: capacity error when one-count floors overflow") {
    EntropyModel m = EntropyModel::standard(1);
    m.precision = 8;
    m.min_symbol = -200;
    m.max_symbol = 200;
    CHECK_THROWS_AS(build_cdf_tables(m), CapacityError);
    m.min_symbol = -127;
    m.max_symbol = 127;  // 255 symbols + escape fits exactly
    CHECK(build_cdf_tables(m).channels.front().cdf.back() == 256);
}

TEST_CASE("bitstream: empty tensor gives a header-only stream") {
    const EntropyModel m = EntropyModel::standard(4, 9);
    const Bitstream s = encode_latent(Tensor::zeros({4, 0, 3}), m);
    CHECK(s.payload.empty());
    CHECK(s.serialize().size() == kBitstreamHeaderBytes);
    const Tensor back = decode_latent(Bitstream::parse(s.serialize()), m);
    CHECK(back.shape() == Shape{4, 0, 3});
}

TEST_CASE("bitstream: layout is big-endian and byte-exact") {
    EntropyModel m = EntropyModel::standard(2, 0x0102);
    Tensor sym({2, 1, 2}, {0, 1, -1, 400});
    const Bitstream s = encode_latent(sym, m);
    const auto bytes = s.serialize();
    REQUIRE(bytes.size() == s.total_bytes());
    CHECK(bytes.size() == kBitstreamHeaderBytes + s.payload.size() + 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SCB1");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0x01);
    CHECK(bytes[6] == 0x02);
    CHECK(bytes[7] == 0);
    CHECK(bytes[8] == 2);
    CHECK(bytes[12] == 2);
    const std::size_t n = s.payload.size();
    CHECK(bytes[16] == n);
    const std::size_t tail = kBitstreamHeaderBytes + n;
    CHECK(bytes[tail + 3] == 1);                      // one escape
    CHECK(bytes[tail + 6] == 0x01);                   // 400 = 0x00000190
    CHECK(bytes[tail + 7] == 0x90);
    CHECK(decode_latent(Bitstream::parse(bytes), m) == sym);
}

TEST_CASE("bitstream: lossless on random models and tensors") {
    Prng rng(4);
    for (int model_i = 0; model_i < 100; ++model_i) {
        const Index C = rng.uniform_int(1, 6);
        const EntropyModel m = random_model(rng, C);
        const CdfTables tables = build_cdf_tables(m);
        for (int t = 0; t < 5; ++t) {
            const Tensor sym = random_symbols(rng, m, {C, rng.uniform_int(1, 9), rng.uniform_int(1, 9)});
            const auto bytes = encode_latent(sym, m, tables).serialize();
            CHECK(decode_latent(Bitstream::parse(bytes), m, tables) == sym);
        }
    }
}

TEST_CASE("bitstream: out-of-range values travel through the bypass section") {
    EntropyModel m = EntropyModel::standard(2, 1);
    Tensor sym({2, 2, 2}, {0, 128, -128, 2147483647, -2147483648.0, 3, -5, 1000});
    const Bitstream s = encode_latent(sym, m);
    CHECK(s.escapes.size() == 5);
    CHECK(decode_latent(Bitstream::parse(s.serialize()), m) == sym);
    CHECK_THROWS_AS(encode_latent(Tensor({2, 1, 1}, {0.0, 1e10}), m), InputError);
}

TEST_CASE("bitstream: coded size tracks the ideal rate") {
    Prng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const EntropyModel m = random_model(rng, 4);
        const Tensor sym = random_symbols(rng, m, {4, 16, 16});
        const double bits = rate_bits(sym, m);
        const Bitstream s = encode_latent(sym, m);
        CHECK(8.0 * static_cast<double>(s.payload.size()) <= bits + 64.0 + 0.02 * bits);
    }
}

TEST_CASE("bitstream: error paths") {
    const EntropyModel m = EntropyModel::standard(2, 3);
    Prng rng(6);
    const Tensor sym = random_symbols(rng, m, {2, 8, 8});
    auto bytes = encode_latent(sym, m).serialize();

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(Bitstream::parse(bad), FormatError);

    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(Bitstream::parse(bad), FormatError);

    EntropyModel other = m;
    other.id = 4;
    CHECK_THROWS_AS(decode_latent(Bitstream::parse(bytes), other), ModelError);

    auto truncated = std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 3);
    CHECK_THROWS_AS(Bitstream::parse(truncated), CorruptionError);

    // Consistent container, short range-coded payload.
    Bitstream s = Bitstream::parse(bytes);
    s.payload.resize(s.payload.size() / 2);
    CHECK_THROWS_AS(decode_latent(s, m), CorruptionError);

    CHECK_THROWS_AS(encode_latent(Tensor({2, 1, 1}, {0.25, 1.0}), m), InputError);
    CHECK_THROWS_AS(encode_latent(Tensor::zeros({3, 1, 1}), m), DimensionError);
}

TEST_CASE("entropy model json round trip") {
    Prng rng(8);
    const EntropyModel m = random_model(rng, 5);
    CHECK(entropy_model_from_json(entropy_model_to_json(m)) == m);
    CHECK_THROWS_AS(entropy_model_from_json("{\"id\": 1}"), FormatError);
}

TEST_CASE("symbol file round trip") {
    Tensor sym({2, 1, 3}, {1, -2, 3, 2147483647, -2147483648.0, 0});
    const auto bytes = serialize_symbols(sym);
    CHECK(bytes.size() == 10 + 6 * 4);
    CHECK(parse_symbols(bytes) == sym);
    auto bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(parse_symbols(bad), CorruptionError);
}
