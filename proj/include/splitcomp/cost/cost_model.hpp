// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

namespace splitcomp::cost {

enum class ComputeMode { Cpu, Gpu };

const char* mode_name(ComputeMode m) noexcept;

struct DeviceProfile {
    std::string name;
    double cpu_gmac_per_s = 1;
    double gpu_gmac_per_s = 1;
    double idle_w = 1;
    double active_w_per_gmac_per_s = 0;  // slope of the affine power model
    double overhead_s = 0;               // fixed cost per stage execution
    double memory_bytes = 0;

    double throughput(ComputeMode m) const noexcept { return m == ComputeMode::Gpu ? gpu_gmac_per_s : cpu_gmac_per_s; }
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct ChannelProfile {
    std::string name;
    double rate_bps = 100'000;
    double overhead_bytes = 0;

    void validate() const;
};

/// Parses "100kbps", "37.5kbps", "2Mbps", "9600bps" or a bare bits/s number.
ChannelProfile parse_channel_rate(const std::string& text);

enum class Placement { Local, Remote };

struct StageProfile {
    std::string name;
    double gmac = 0;
    double param_bytes = 0;
    double output_bytes = 0;
    Placement placement = Placement::Local;
};

struct PowerSample {
    double t;
    double p;
};

using PowerTrace = std::vector<PowerSample>;

/// A span of constant utilization, in GMAC/s actually executed.
struct UtilizationSegment {
    double duration_s;
    double gmac_per_s;
};

double stage_latency(const StageProfile& stage, const DeviceProfile& device, ComputeMode mode);

double tx_time(double bytes, const ChannelProfile& channel);

/// Composite Simpson over uniformly spaced samples. With an odd number of
/// intervals the last one is integrated with the trapezoid rule.
/// Throws InputError for fewer than 3 samples or spacing that drifts by
/// more than 1e-9 s.
double simpson_energy(std::span<const PowerSample> trace);

/// Samples idle + slope * utilization at about `sample_hz`; the interval count
/// is max(2, round(total * hz)) so the trace spans the schedule exactly.
/// Utilization is right-continuous at segment boundaries.
PowerTrace synth_power_trace(const DeviceProfile& device, std::span<const UtilizationSegment> schedule,
                             double sample_hz);

struct MeasurementOptions {
    int warmup_runs = 5;
    int measured_runs = 10;
    double sample_hz = 1000;
};

/// Energy per inference: the schedule is repeated warm-up + measured times,
/// the warm-up portion of the trace is discarded and the remainder is
/// integrated and averaged.
double measured_energy(const DeviceProfile& device, std::span<const UtilizationSegment> per_inference,
                       const MeasurementOptions& opts = {});

}  // namespace splitcomp::cost
