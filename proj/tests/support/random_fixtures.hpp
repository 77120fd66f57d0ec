// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "splitcomp/bench/plan.hpp"
#include "splitcomp/prng.hpp"

namespace splitcomp::testing {

inline cost::DeviceProfile random_device(Prng& rng, const char* name, double scale) {
    return {name,
            scale * rng.uniform(1, 50),
            scale * rng.uniform(20, 600),
            rng.uniform(0.5, 10),
            rng.uniform(0.001, 0.1),
            rng.uniform(0, 0.01),
            rng.uniform(1e9, 3e10)};
}

/// Fixtures where SC and Ladon share every stage cost and every task sends
/// the same number of bytes, so the only difference is the plan shape.
inline bench::SplitFixtures random_equal_fixtures(Prng& rng) {
    bench::SplitFixtures f = bench::default_fixtures();
    const bench::StageCost pre{rng.uniform(0, 0.05), 0, rng.uniform(1e5, 1e6)};
    const bench::StageCost enc{rng.uniform(0.05, 3), rng.uniform(2e5, 2e6), rng.uniform(1e4, 1e5)};
    const bench::StageCost trunk{rng.uniform(0.5, 60), rng.uniform(1e7, 5e8), rng.uniform(1e4, 1e6)};
    std::array<bench::StageCost, 3> heads;
    for (auto& h : heads) h = {rng.uniform(0.001, 80), rng.uniform(1e6, 1e8), rng.uniform(1e3, 1e5)};

    f.preprocess = pre;
    for (std::size_t t = 0; t < 3; ++t) {
        f.sc_encoder[t] = enc;
        f.sc_tail[t] = {trunk.gmac + heads[t].gmac, trunk.param_bytes + heads[t].param_bytes, heads[t].output_bytes};
    }
    for (bench::LadonFixture* l : {&f.resnet50, &f.resnest269e}) {
        l->encoder = enc;
        l->decoder_backbone = trunk;
        l->heads = heads;
    }
    f.set_uniform_payload(std::round(rng.uniform(500, 40000)));
    return f;
}

}  // namespace splitcomp::testing
