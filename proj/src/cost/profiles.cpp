// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/cost/profiles.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splitcomp/error.hpp"

namespace splitcomp::cost {

using nlohmann::json;

const DeviceProfile& ProfileSet::device(const std::string& name) const {
    const auto it = devices.find(name);
    if (it == devices.end()) throw ConfigError("unknown device profile '" + name + "'");
    return it->second;
}

ChannelProfile ProfileSet::channel(const std::string& name_or_rate) const {
    const auto it = channels.find(name_or_rate);
    if (it != channels.end()) return it->second;
    try {
        return parse_channel_rate(name_or_rate);
    } catch (const ConfigError&) {
        throw ConfigError("unknown channel profile '" + name_or_rate + "'");
    }
}

ProfileSet builtin_profiles() {
    constexpr double GiB = 1024.0 * 1024.0 * 1024.0;
    ProfileSet s;
    s.devices["jetson_nano"] = {"jetson_nano", 6.0, 120.0, 1.9, 0.045, 0.004, 4 * GiB};
    s.devices["jetson_xavier_nx"] = {"jetson_xavier_nx", 18.0, 520.0, 3.2, 0.018, 0.003, 8 * GiB};
    s.devices["laptop"] = {"laptop", 160.0, 2600.0, 9.5, 0.012, 0.0015, 32 * GiB};
    s.channels["100kbps"] = {"100kbps", 100'000.0, 0.0};
    s.channels["lora"] = {"lora", 37'500.0, 0.0};
    return s;
}

std::string profiles_to_json(const ProfileSet& set) {
    json j;
    j["devices"] = json::array();
    for (const auto& [name, d] : set.devices) {
        j["devices"].push_back({{"name", name},
                                {"cpu_gmac_per_s", d.cpu_gmac_per_s},
                                {"gpu_gmac_per_s", d.gpu_gmac_per_s},
                                {"idle_w", d.idle_w},
                                {"active_w_per_gmac_per_s", d.active_w_per_gmac_per_s},
                                {"overhead_s", d.overhead_s},
                                {"memory_bytes", d.memory_bytes}});
    }
    j["channels"] = json::array();
    for (const auto& [name, c] : set.channels) {
        j["channels"].push_back({{"name", name}, {"rate_bps", c.rate_bps}, {"overhead_bytes", c.overhead_bytes}});
    }
    return j.dump(2) + "\n";
}

ProfileSet profiles_from_json(const std::string& text) {
    ProfileSet s;
    try {
        const json j = json::parse(text);
        for (const auto& d : j.value("devices", json::array())) {
            DeviceProfile p;
            p.name = d.at("name").get<std::string>();
            p.cpu_gmac_per_s = d.at("cpu_gmac_per_s").get<double>();
            p.gpu_gmac_per_s = d.at("gpu_gmac_per_s").get<double>();
            p.idle_w = d.at("idle_w").get<double>();
            p.active_w_per_gmac_per_s = d.at("active_w_per_gmac_per_s").get<double>();
            p.overhead_s = d.value("overhead_s", 0.0);
            p.memory_bytes = d.value("memory_bytes", 0.0);
            p.validate();
            if (!s.devices.emplace(p.name, p).second) throw ConfigError("duplicate device profile '" + p.name + "'");
        }
        for (const auto& c : j.value("channels", json::array())) {
            ChannelProfile p;
            p.name = c.at("name").get<std::string>();
            p.rate_bps = c.at("rate_bps").get<double>();
            p.overhead_bytes = c.value("overhead_bytes", 0.0);
            p.validate();
            if (!s.channels.emplace(p.name, p).second) throw ConfigError("duplicate channel profile '" + p.name + "'");
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("profiles: ") + e.what());
    }
    return s;
}

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read profiles " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void merge(ProfileSet& into, const ProfileSet& from, const std::filesystem::path& origin) {
    for (const auto& [name, d] : from.devices) {
        if (!into.devices.emplace(name, d).second)
            throw ConfigError("duplicate device profile '" + name + "' in " + origin.string());
    }
    for (const auto& [name, c] : from.channels) {
        if (!into.channels.emplace(name, c).second)
            throw ConfigError("duplicate channel profile '" + name + "' in " + origin.string());
    }
}

}  // namespace

ProfileSet load_profiles(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(path)) return profiles_from_json(read_text(path));

    // Directory: every *.json with a devices or channels key, in name order.
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    ProfileSet out;
    for (const auto& f : files) {
        const std::string text = read_text(f);
        const json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object() || (!j.contains("devices") && !j.contains("channels"))) continue;
        merge(out, profiles_from_json(text), f);
    }
    return out;
}

}  // namespace splitcomp::cost
