// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "splitcomp/bench/plan.hpp"

namespace splitcomp::bench {

inline constexpr const char* kCsvHeader =
    "scenario_id,kind,beta,latency_s,latency_local_s,latency_tx_s,latency_server_s,energy_j,local_gmac,tx_bytes,"
    "encoder_bytes,peak_local_bytes";

/// Header plus one row per record; numbers use the shortest round-trip
/// decimal form, beta is empty where it does not apply.
std::string to_csv(std::span<const MetricsRecord> records);
std::vector<MetricsRecord> parse_csv(const std::string& text);  // FormatError

/// InputError if empty, IoError if the file cannot be written.
void report(std::span<const MetricsRecord> records, const std::filesystem::path& out);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

}  // namespace splitcomp::bench
