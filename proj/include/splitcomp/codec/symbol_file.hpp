// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "splitcomp/tensor.hpp"

namespace splitcomp::codec {

// Raw integer symbol tensor on disk: "SYM1", C, H, W as big-endian u16,
// then C*H*W big-endian signed 32-bit values in row-major order.

std::vector<std::uint8_t> serialize_symbols(const Tensor& symbols);
Tensor parse_symbols(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace splitcomp::codec
