// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "splitcomp/cost/cost_model.hpp"

namespace splitcomp::cost {

struct ProfileSet {
    std::map<std::string, DeviceProfile> devices;
    std::map<std::string, ChannelProfile> channels;

    /// ConfigError if the name is unknown.
    const DeviceProfile& device(const std::string& name) const;
    /// Known channel name or a rate literal such as "37.5kbps".
    ChannelProfile channel(const std::string& name_or_rate) const;
};

/// The shipped fixture roster: jetson_nano, jetson_xavier_nx and laptop
/// devices; "100kbps" and "lora" channels. Numbers are placeholders.
ProfileSet builtin_profiles();

std::string profiles_to_json(const ProfileSet& set);
ProfileSet profiles_from_json(const std::string& text);  // FormatError / ConfigError
/// A file, or a directory whose *.json files carrying "devices" or
/// "channels" are merged. Other JSON files in the directory are skipped.
ProfileSet load_profiles(const std::filesystem::path& path);

}  // namespace splitcomp::cost
