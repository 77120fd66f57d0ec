// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "splitcomp/codec/entropy_model.hpp"

namespace splitcomp::codec {

/// Entropy models by id, as served to decoders.
using EntropyRegistry = std::map<std::uint16_t, EntropyModel>;

/// JSON text form: {"id", "min_symbol", "max_symbol", "precision",
/// "tail_mass", "loc": [...], "log_scale": [...]}. Doubles are written with
/// round-trip precision.
std::string entropy_model_to_json(const EntropyModel& model);
EntropyModel entropy_model_from_json(const std::string& text);

EntropyModel load_entropy_model(const std::filesystem::path& path);
void save_entropy_model(const EntropyModel& model, const std::filesystem::path& path);

}  // namespace splitcomp::codec
