// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitcomp/codec/cdf_table.hpp"

namespace splitcomp::codec {

// Carry-propagating range coder over 2^precision frequency tables.
//
// Encoder state: 64-bit `low`, 32-bit `range` (starts 0xFFFFFFFF), one
// cached byte plus a count of pending 0xFF bytes. Encoding symbol [lo, lo+f):
//
//   r      = range >> precision
//   low   += r * lo
//   range  = r * f
//   while range < 2^24: shift_low(); range <<= 8
//
// shift_low() settles the top byte of the 32-bit window once no carry can
// reach it any more:
//
//   if (low mod 2^32) < 0xFF000000 or low >= 2^32:
//       carry = low >> 32
//       emit cache + carry, then (pending - 1) bytes of 0xFF + carry
//       cache = (low >> 24) & 0xFF; pending = 0
//   pending += 1
//   low = (low & 0x00FFFFFF) << 8
//
// The very first settled byte is provably zero and is not written. finish()
// calls shift_low() five times, so a stream of n renormalisations is exactly
// n + 4 bytes long. The decoder mirrors the encoder on (range, code):
// it loads 4 bytes, then per symbol computes r = range >> precision,
// v = min(code / r, 2^precision - 1), looks v up in the table, subtracts
// r * lo from code, sets range = r * f and renormalises by shifting in one
// byte per step.

class RangeEncoder {
public:
    void encode(std::uint32_t cum_low, std::uint32_t freq, int precision);
    void encode(const CdfTable& table, std::size_t symbol) {
        encode(table.low(symbol), table.freq(symbol), table.precision);
    }

    /// Flushes the state and returns the code bytes. The encoder is spent afterwards.
    std::vector<std::uint8_t> finish();

private:
    void shift_low();

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t pending_ = 1;
    bool first_ = true;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    /// Throws CorruptionError if fewer than 4 bytes are available.
    explicit RangeDecoder(std::span<const std::uint8_t> bytes);

    std::size_t decode(const CdfTable& table);

    /// Bytes consumed so far; equals the stream length after a clean decode.
    std::size_t consumed() const noexcept { return pos_; }

private:
    std::uint8_t next_byte();

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t code_ = 0;
};

}  // namespace splitcomp::codec
