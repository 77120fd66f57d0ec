// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/bench/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "splitcomp/error.hpp"

namespace splitcomp::bench {

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_number(const std::string& field, std::size_t line) {
    double v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw FormatError("csv line " + std::to_string(line) + ": bad number '" + field + "'");
    }
    return v;
}

std::vector<std::string> split_row(const std::string& row) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : row) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string to_csv(std::span<const MetricsRecord> records) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : records) {
        out += r.scenario_id + ',' + r.kind + ',' + (r.beta ? format_number(*r.beta) : std::string());
        for (double v : {r.latency_s, r.latency_local_s, r.latency_tx_s, r.latency_server_s, r.energy_j, r.local_gmac,
                         r.tx_bytes, r.encoder_bytes, r.peak_local_bytes}) {
            out += ',' + format_number(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<MetricsRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("csv: missing or unexpected header");
    std::vector<MetricsRecord> out;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto f = split_row(line);
        if (f.size() != 12) throw FormatError("csv line " + std::to_string(n) + ": expected 12 fields");
        MetricsRecord r;
        r.scenario_id = f[0];
        r.kind = f[1];
        if (!f[2].empty()) r.beta = parse_number(f[2], n);
        double* fields[] = {&r.latency_s,  &r.latency_local_s, &r.latency_tx_s,  &r.latency_server_s,
                            &r.energy_j,   &r.local_gmac,      &r.tx_bytes,      &r.encoder_bytes,
                            &r.peak_local_bytes};
        for (std::size_t i = 0; i < 9; ++i) *fields[i] = parse_number(f[i + 3], n);
        out.push_back(r);
    }
    return out;
}

void report(std::span<const MetricsRecord> records, const std::filesystem::path& out) {
    if (records.empty()) throw InputError("report: no records");
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write report " + out.string());
    f << to_csv(records);
    if (!f) throw IoError("write failed for " + out.string());
}

}  // namespace splitcomp::bench
