// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/cost/cost_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "splitcomp/error.hpp"

namespace splitcomp::cost {

const char* mode_name(ComputeMode m) noexcept { return m == ComputeMode::Gpu ? "gpu" : "cpu"; }

namespace {

void require_positive(double v, const std::string& owner, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(owner + ": " + field + " must be positive");
}

void require_non_negative(double v, const std::string& owner, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(owner + ": " + field + " must be non-negative");
}

}  // namespace

void DeviceProfile::validate() const {
    const std::string owner = "device '" + name + "'";
    require_positive(cpu_gmac_per_s, owner, "cpu_gmac_per_s");
    require_positive(gpu_gmac_per_s, owner, "gpu_gmac_per_s");
    require_positive(idle_w, owner, "idle_w");
    require_positive(active_w_per_gmac_per_s, owner, "active_w_per_gmac_per_s");
    require_non_negative(overhead_s, owner, "overhead_s");
    require_non_negative(memory_bytes, owner, "memory_bytes");
}

void ChannelProfile::validate() const {
    const std::string owner = "channel '" + name + "'";
    require_positive(rate_bps, owner, "rate_bps");
    require_non_negative(overhead_bytes, owner, "overhead_bytes");
}

ChannelProfile parse_channel_rate(const std::string& text) {
    static const std::regex re(R"(^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([kKmMgG]?)(bps)?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) throw ConfigError("cannot parse channel rate '" + text + "'");
    double rate = std::stod(m[1].str());
    switch (std::tolower(static_cast<unsigned char>(m[2].str().empty() ? ' ' : m[2].str()[0]))) {
        case 'k': rate *= 1e3; break;
        case 'm': rate *= 1e6; break;
        case 'g': rate *= 1e9; break;
        default: break;
    }
    ChannelProfile ch{text, rate, 0};
    ch.validate();
    return ch;
}

double stage_latency(const StageProfile& stage, const DeviceProfile& device, ComputeMode mode) {
    return stage.gmac / device.throughput(mode) + device.overhead_s;
}

double tx_time(double bytes, const ChannelProfile& channel) {
    return (bytes + channel.overhead_bytes) * 8.0 / channel.rate_bps;
}

double simpson_energy(std::span<const PowerSample> trace) {
    if (trace.size() < 3) throw InputError("simpson_energy: need at least 3 samples, got " + std::to_string(trace.size()));
    const std::size_t n = trace.size() - 1;
    const double h = (trace.back().t - trace.front().t) / static_cast<double>(n);
    if (!(h > 0.0)) throw InputError("simpson_energy: sample times must be strictly increasing");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!std::isfinite(trace[i].p) || trace[i].p < 0.0) throw InputError("simpson_energy: power must be finite and >= 0");
        if (i > 0 && std::abs((trace[i].t - trace[i - 1].t) - h) > 1e-9) {
            throw InputError("simpson_energy: non-uniform sample spacing at index " + std::to_string(i));
        }
    }
    const std::size_t even = n - n % 2;
    double odd_sum = 0, even_sum = 0;
    for (std::size_t i = 1; i < even; ++i) (i % 2 ? odd_sum : even_sum) += trace[i].p;
    double energy = h / 3.0 * (trace[0].p + 4.0 * odd_sum + 2.0 * even_sum + trace[even].p);
    if (n % 2) energy += 0.5 * h * (trace[n - 1].p + trace[n].p);
    return std::max(energy, 0.0);
}

PowerTrace synth_power_trace(const DeviceProfile& device, std::span<const UtilizationSegment> schedule,
                             double sample_hz) {
    if (schedule.empty()) throw InputError("synth_power_trace: empty schedule");
    if (!(sample_hz > 0.0)) throw ParameterError("synth_power_trace: sample rate must be positive");
    std::vector<double> ends;
    double total = 0;
    for (const auto& seg : schedule) {
        if (!(seg.duration_s > 0.0)) throw InputError("synth_power_trace: segment durations must be positive");
        if (seg.gmac_per_s < 0.0) throw InputError("synth_power_trace: utilization must be non-negative");
        total += seg.duration_s;
        ends.push_back(total);
    }
    const auto intervals = std::max<long long>(2, std::llround(total * sample_hz));
    const double h = total / static_cast<double>(intervals);
    const double eps = 1e-9 * h;

    PowerTrace trace;
    trace.reserve(static_cast<std::size_t>(intervals + 1));
    std::size_t seg = 0;
    for (long long i = 0; i <= intervals; ++i) {
        const double t = static_cast<double>(i) * h;
        while (seg + 1 < schedule.size() && t >= ends[seg] - eps) ++seg;
        trace.push_back({t, device.idle_w + device.active_w_per_gmac_per_s * schedule[seg].gmac_per_s});
    }
    return trace;
}

double measured_energy(const DeviceProfile& device, std::span<const UtilizationSegment> per_inference,
                       const MeasurementOptions& opts) {
    if (opts.warmup_runs < 0 || opts.measured_runs < 1) throw ParameterError("measured_energy: bad run counts");
    double period = 0;
    for (const auto& seg : per_inference) period += seg.duration_s;
    if (!(period > 0.0)) throw InputError("measured_energy: empty schedule");

    // An even, whole number of intervals per inference keeps the warm-up cut
    // on a sample and every Simpson panel inside the measured window.
    long long per_run = std::max<long long>(2, std::llround(period * opts.sample_hz));
    per_run += per_run % 2;

    std::vector<UtilizationSegment> repeated;
    const int runs = opts.warmup_runs + opts.measured_runs;
    for (int r = 0; r < runs; ++r) repeated.insert(repeated.end(), per_inference.begin(), per_inference.end());
    const PowerTrace trace = synth_power_trace(device, repeated, static_cast<double>(per_run) / period);

    const auto cut = static_cast<std::size_t>(per_run * opts.warmup_runs);
    const std::span<const PowerSample> measured(trace.data() + cut, trace.size() - cut);
    return simpson_energy(measured) / opts.measured_runs;
}

}  // namespace splitcomp::cost
