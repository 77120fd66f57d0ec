// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "splitcomp/cost/cost_model.hpp"
#include "splitcomp/cost/profiles.hpp"
#include "splitcomp/error.hpp"
#include "splitcomp/prng.hpp"

using namespace splitcomp;
using namespace splitcomp::cost;

namespace {

PowerTrace sample(double (*f)(double), double a, double b, int intervals) {
    PowerTrace t;
    for (int i = 0; i <= intervals; ++i) {
        const double x = a + (b - a) * i / intervals;
        t.push_back({x, f(x)});
    }
    return t;
}

DeviceProfile device(double idle = 2.0, double coef = 0.05) { return {"d", 10.0, 100.0, idle, coef, 0.01, 1e9}; }

}  // namespace

TEST_CASE("stage latency") {
    const DeviceProfile d{"d", 5.0, 50.0, 1.0, 0.1, 0.25, 0};
    CHECK(stage_latency({"s", 0.0}, d, ComputeMode::Cpu) == 0.25);
    DeviceProfile no_overhead = d;
    no_overhead.overhead_s = 0;
    CHECK(stage_latency({"s", 10.0}, no_overhead, ComputeMode::Cpu) == 2.0);
    CHECK(stage_latency({"s", 10.0}, no_overhead, ComputeMode::Gpu) == 0.2);
    Prng rng(41);
    for (int i = 0; i < 100; ++i) {
        const StageProfile s{"s", rng.uniform(0.01, 50)};
        DeviceProfile a = no_overhead, b = no_overhead;
        a.cpu_gmac_per_s = rng.uniform(0.5, 100);
        b.cpu_gmac_per_s = 2 * a.cpu_gmac_per_s;
        CHECK(stage_latency(s, b, ComputeMode::Cpu) == doctest::Approx(stage_latency(s, a, ComputeMode::Cpu) / 2));
        CHECK(stage_latency(s, b, ComputeMode::Cpu) < stage_latency(s, a, ComputeMode::Cpu));
    }
}

TEST_CASE("tx time") {
    const ChannelProfile fast{"fast", 100'000, 0}, slow{"slow", 37'500, 0};
    CHECK(tx_time(125'000, fast) == 10.0);
    CHECK(tx_time(0, fast) == 0.0);
    CHECK(tx_time(4321, slow) / tx_time(4321, fast) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(tx_time(100, ChannelProfile{"o", 8000, 20}) == doctest::Approx(0.12));
    double prev = tx_time(1000, {"r", 1000, 0});
    for (double r = 2000; r < 1e6; r *= 1.5) {
        const double cur = tx_time(1000, {"r", r, 0});
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("channel rate literals") {
    CHECK(parse_channel_rate("100kbps").rate_bps == 100'000);
    CHECK(parse_channel_rate("37.5kbps").rate_bps == 37'500);
    CHECK(parse_channel_rate("2Mbps").rate_bps == 2e6);
    CHECK(parse_channel_rate("9600").rate_bps == 9600);
    CHECK_THROWS_AS(parse_channel_rate("fast"), ConfigError);
    CHECK_THROWS_AS(parse_channel_rate("0kbps"), ConfigError);
}

TEST_CASE("simpson: closed forms") {
    CHECK(simpson_energy(PowerTrace{{0, 5}, {1, 5}, {2, 5}}) == 10.0);
    const double quad = simpson_energy(sample([](double x) { return x * x; }, 0, 1, 2));
    CHECK(std::abs(quad - 1.0 / 3.0) <= 1e-12 / 3.0);
    const double cubic = simpson_energy(sample([](double x) { return x * x * x; }, 0, 1, 4));
    CHECK(std::abs(cubic - 0.25) <= 1e-12 * 0.25);
}

TEST_CASE("simpson: exact for random cubics with even interval counts") {
    Prng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const double c0 = rng.uniform(1, 5), c1 = rng.uniform(0, 2), c2 = rng.uniform(0, 2), c3 = rng.uniform(0, 2);
        const double b = rng.uniform(0.5, 4);
        const int n = 2 * static_cast<int>(rng.uniform_int(1, 50));
        PowerTrace t;
        for (int i = 0; i <= n; ++i) {
            const double x = b * i / n;
            t.push_back({x, c0 + x * (c1 + x * (c2 + x * c3))});
        }
        const double exact = b * (c0 + b * (c1 / 2 + b * (c2 / 3 + b * c3 / 4)));
        CHECK(std::abs(simpson_energy(t) - exact) <= 1e-12 * exact);
    }
}

TEST_CASE("simpson: odd interval counts use a trapezoid on the last interval") {
    // Linear integrands are exact under both rules.
    const double lin = simpson_energy(sample([](double x) { return 2 * x + 1; }, 0, 3, 3));
    CHECK(lin == doctest::Approx(12.0).epsilon(1e-14));
    // For x^2 on [0,3] with 3 intervals: Simpson on [0,2] is exact (8/3),
    // trapezoid on [2,3] gives (4 + 9)/2 = 6.5.
    const double quad = simpson_energy(sample([](double x) { return x * x; }, 0, 3, 3));
    CHECK(quad == doctest::Approx(8.0 / 3.0 + 6.5).epsilon(1e-14));
}

TEST_CASE("simpson: linearity") {
    Prng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 40));
        const double a = rng.uniform(0, 3), b = rng.uniform(0, 3);
        PowerTrace p1, p2, mix;
        for (int i = 0; i <= n; ++i) {
            const double t = 0.01 * i, x = rng.uniform(0, 10), y = rng.uniform(0, 10);
            p1.push_back({t, x});
            p2.push_back({t, y});
            mix.push_back({t, a * x + b * y});
        }
        const double lhs = simpson_energy(mix), rhs = a * simpson_energy(p1) + b * simpson_energy(p2);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(std::abs(rhs), 1e-300));
    }
}

TEST_CASE("simpson: input errors") {
    CHECK_THROWS_AS(simpson_energy(PowerTrace{{0, 1}, {1, 1}}), InputError);
    CHECK_THROWS_AS(simpson_energy(PowerTrace{{0, 1}, {1, 1}, {2.1, 1}}), InputError);
    CHECK_THROWS_AS(simpson_energy(PowerTrace{{0, 1}, {1, -1}, {2, 1}}), InputError);
    CHECK_NOTHROW(simpson_energy(PowerTrace{{0, 1}, {1 + 5e-10, 1}, {2, 1}}));
}

TEST_CASE("synthetic power traces") {
    const DeviceProfile d = device();
    const std::vector<UtilizationSegment> idle{{1.5, 0.0}};
    for (const auto& s : synth_power_trace(d, idle, 100)) CHECK(s.p == d.idle_w);

    Prng rng(44);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<UtilizationSegment> sched;
        double analytic = 0;
        for (int k = 0; k < static_cast<int>(rng.uniform_int(1, 6)); ++k) {
            const UtilizationSegment seg{rng.uniform(0.05, 2), rng.uniform(0, 80)};
            sched.push_back(seg);
            analytic += (d.idle_w + d.active_w_per_gmac_per_s * seg.gmac_per_s) * seg.duration_s;
        }
        const double e = simpson_energy(synth_power_trace(d, sched, 1000));
        CHECK(std::abs(e - analytic) <= 0.01 * analytic);

        const DeviceProfile d2 = device(d.idle_w, 2 * d.active_w_per_gmac_per_s);
        double total = 0;
        for (const auto& s : sched) total += s.duration_s;
        const double e2 = simpson_energy(synth_power_trace(d2, sched, 1000));
        CHECK((e2 - d.idle_w * total) == doctest::Approx(2 * (e - d.idle_w * total)).epsilon(1e-9));
    }
}

TEST_CASE("warm-up discards leading inferences and averages the rest") {
    const DeviceProfile d = device();
    const std::vector<UtilizationSegment> once{{0.2, 40.0}, {0.3, 0.0}};
    const double analytic = (d.idle_w + d.active_w_per_gmac_per_s * 40.0) * 0.2 + d.idle_w * 0.3;
    const double e = measured_energy(d, once, {5, 10, 1000});
    CHECK(std::abs(e - analytic) <= 0.01 * analytic);
    CHECK(measured_energy(d, once, {0, 3, 1000}) == doctest::Approx(e).epsilon(0.01));
    CHECK_THROWS_AS(measured_energy(d, once, {1, 0, 1000}), ParameterError);
}

TEST_CASE("profiles: builtin roster, JSON round trip, lookups") {
    const ProfileSet s = builtin_profiles();
    for (const char* name : {"jetson_nano", "jetson_xavier_nx", "laptop"}) CHECK_NOTHROW(s.device(name).validate());
    CHECK(s.device("jetson_nano").memory_bytes == 4.0 * 1024 * 1024 * 1024);
    CHECK(s.channel("lora").rate_bps == 37'500);
    CHECK(s.channel("12kbps").rate_bps == 12'000);
    CHECK_THROWS_AS(s.device("pixel"), ConfigError);
    CHECK_THROWS_AS(s.channel("carrier-pigeon"), ConfigError);

    const ProfileSet back = profiles_from_json(profiles_to_json(s));
    CHECK(profiles_to_json(back) == profiles_to_json(s));
    CHECK_THROWS_AS(profiles_from_json("{\"devices\":[{\"name\":\"x\"}]}"), FormatError);
    CHECK_THROWS_AS(profiles_from_json(R"({"channels":[{"name":"x","rate_bps":0}]})"), ConfigError);
}
