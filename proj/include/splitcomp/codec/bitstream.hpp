// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "splitcomp/codec/cdf_table.hpp"
#include "splitcomp/codec/entropy_model.hpp"
#include "splitcomp/tensor.hpp"

namespace splitcomp::codec {

/// Encoded latent. Byte layout (big-endian; see docs/FORMAT.md):
///
///   0  magic "SCB1"        4 bytes
///   4  version             1 byte   (Bitstream::kVersion)
///   5  entropy model id    2 bytes
///   7  C, H, W             3 x 2 bytes
///  13  payload length      4 bytes
///  17  payload             range-coded symbols
///  ..  bypass (optional)   4-byte count N, then N signed 32-bit values
///
/// The bypass section is present only when at least one symbol escaped, so
/// total_bytes() == 17 + payload length + bypass length.
struct Bitstream {
    static constexpr std::array<std::uint8_t, 4> kMagic{'S', 'C', 'B', '1'};
    static constexpr std::uint8_t kVersion = 1;

    std::uint8_t version = kVersion;
    std::uint16_t model_id = 0;
    std::array<std::uint16_t, 3> shape{0, 0, 0};
    std::vector<std::uint8_t> payload;
    std::vector<std::int32_t> escapes;

    std::vector<std::uint8_t> serialize() const;

    /// Parses and validates the container layout (not the payload contents).
    /// Bad magic or version -> FormatError; short input or inconsistent
    /// lengths -> CorruptionError.
    static Bitstream parse(std::span<const std::uint8_t> bytes);

    std::size_t bypass_bytes() const noexcept { return escapes.empty() ? 0 : 4 + 4 * escapes.size(); }
    std::size_t total_bytes() const noexcept;

    friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

inline constexpr std::size_t kBitstreamHeaderBytes = 17;

Bitstream encode_latent(const Tensor& symbols, const EntropyModel& model);
Bitstream encode_latent(const Tensor& symbols, const EntropyModel& model, const CdfTables& tables);

/// model id mismatch -> ModelError; malformed payload -> CorruptionError.
Tensor decode_latent(const Bitstream& stream, const EntropyModel& model);
Tensor decode_latent(const Bitstream& stream, const EntropyModel& model, const CdfTables& tables);

}  // namespace splitcomp::codec
