// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/range_coder.hpp"

#include <algorithm>

namespace splitcomp::codec {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

void RangeEncoder::encode(std::uint32_t cum_low, std::uint32_t freq, int precision) {
    const std::uint32_t r = range_ >> precision;
    low_ += static_cast<std::uint64_t>(r) * cum_low;
    range_ = r * freq;
    while (range_ < kTop) {
        shift_low();
        range_ <<= 8;
    }
}

void RangeEncoder::shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        const auto carry = static_cast<std::uint8_t>(low_ >> 32);
        std::uint8_t byte = cache_;
        do {
            if (first_) {
                first_ = false;
            } else {
                out_.push_back(static_cast<std::uint8_t>(byte + carry));
            }
            byte = 0xFF;
        } while (--pending_ != 0);
        cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++pending_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
    if (pos_ >= in_.size()) throw CorruptionError("range decoder: payload truncated");
    return in_[pos_++];
}

std::size_t RangeDecoder::decode(const CdfTable& table) {
    const std::uint32_t r = range_ >> table.precision;
    const std::uint32_t target = std::min<std::uint32_t>(code_ / r, table.total() - 1);
    const std::size_t symbol = table.find(target);
    code_ -= r * table.low(symbol);
    range_ = r * table.freq(symbol);
    while (range_ < kTop) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
    return symbol;
}

}  // namespace splitcomp::codec
