// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/bitstream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splitcomp/byte_io.hpp"
#include "splitcomp/codec/range_coder.hpp"

namespace splitcomp::codec {

std::size_t Bitstream::total_bytes() const noexcept {
    return kBitstreamHeaderBytes + payload.size() + bypass_bytes();
}

std::vector<std::uint8_t> Bitstream::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(total_bytes());
    ByteWriter w(out);
    w.bytes(kMagic);
    w.u8(version);
    w.u16(model_id);
    for (auto d : shape) w.u16(d);
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.bytes(payload);
    if (!escapes.empty()) {
        w.u32(static_cast<std::uint32_t>(escapes.size()));
        for (auto v : escapes) w.i32(v);
    }
    return out;
}

Bitstream Bitstream::parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw FormatError("bitstream: bad magic");
    }
    ByteReader r(bytes);
    r.bytes(kMagic.size());
    Bitstream s;
    s.version = r.u8();
    if (s.version != kVersion) throw FormatError("bitstream: unsupported version " + std::to_string(s.version));
    s.model_id = r.u16();
    for (auto& d : s.shape) d = r.u16();
    const std::uint32_t payload_len = r.u32();
    const auto payload = r.bytes(payload_len);
    s.payload.assign(payload.begin(), payload.end());
    if (r.remaining() > 0) {
        const std::uint32_t count = r.u32();
        if (count == 0) throw CorruptionError("bitstream: empty bypass section");
        if (r.remaining() != std::size_t{count} * 4) throw CorruptionError("bitstream: bypass length mismatch");
        s.escapes.resize(count);
        for (auto& v : s.escapes) v = r.i32();
    }
    return s;
}

Bitstream encode_latent(const Tensor& symbols, const EntropyModel& model) {
    return encode_latent(symbols, model, build_cdf_tables(model));
}

Bitstream encode_latent(const Tensor& symbols, const EntropyModel& model, const CdfTables& tables) {
    require_rank(symbols, 3, "encode_latent symbols");
    if (symbols.dim(0) != model.channels()) {
        throw DimensionError("encode_latent: channel axis is " + std::to_string(symbols.dim(0)) + ", model has " +
                             std::to_string(model.channels()));
    }
    Bitstream s;
    s.model_id = model.id;
    for (int a = 0; a < 3; ++a) {
        if (symbols.dim(a) > std::numeric_limits<std::uint16_t>::max()) {
            throw DimensionError("encode_latent: axis " + std::to_string(a) + " exceeds 65535");
        }
        s.shape[static_cast<std::size_t>(a)] = static_cast<std::uint16_t>(symbols.dim(a));
    }
    if (symbols.empty()) return s;

    RangeEncoder enc;
    const std::size_t escape = tables.escape_index();
    for (Index i = 0; i < symbols.size(); ++i) {
        const double v = symbols[i];
        if (!std::isfinite(v) || v != std::round(v)) throw InputError("encode_latent: symbols must be integral");
        if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
            throw InputError("encode_latent: symbol outside the 32-bit bypass range");
        }
        const auto k = static_cast<std::int32_t>(v);
        const auto& table = tables.channels[static_cast<std::size_t>(channel_of(symbols, i))];
        if (k >= tables.min_symbol && k <= tables.max_symbol) {
            enc.encode(table, static_cast<std::size_t>(k - tables.min_symbol));
        } else {
            enc.encode(table, escape);
            s.escapes.push_back(k);
        }
    }
    s.payload = enc.finish();
    return s;
}

Tensor decode_latent(const Bitstream& stream, const EntropyModel& model) {
    return decode_latent(stream, model, build_cdf_tables(model));
}

Tensor decode_latent(const Bitstream& stream, const EntropyModel& model, const CdfTables& tables) {
    if (stream.version != Bitstream::kVersion) throw FormatError("decode_latent: unsupported version");
    if (stream.model_id != model.id) {
        throw ModelError("decode_latent: stream was coded with entropy model " + std::to_string(stream.model_id) +
                         ", got model " + std::to_string(model.id));
    }
    if (stream.shape[0] != model.channels()) {
        throw CorruptionError("decode_latent: stream has " + std::to_string(stream.shape[0]) +
                              " channels, model has " + std::to_string(model.channels()));
    }
    Tensor out({stream.shape[0], stream.shape[1], stream.shape[2]});
    if (out.empty()) {
        if (!stream.payload.empty() || !stream.escapes.empty()) {
            throw CorruptionError("decode_latent: payload present for an empty tensor");
        }
        return out;
    }

    RangeDecoder dec(stream.payload);
    const std::size_t escape = tables.escape_index();
    std::size_t next_escape = 0;
    for (Index i = 0; i < out.size(); ++i) {
        const auto& table = tables.channels[static_cast<std::size_t>(channel_of(out, i))];
        const std::size_t idx = dec.decode(table);
        if (idx == escape) {
            if (next_escape >= stream.escapes.size()) throw CorruptionError("decode_latent: bypass section exhausted");
            out[i] = stream.escapes[next_escape++];
        } else {
            out[i] = static_cast<double>(tables.min_symbol + static_cast<std::int64_t>(idx));
        }
    }
    if (dec.consumed() != stream.payload.size()) {
        throw CorruptionError("decode_latent: payload length does not match the coded symbols");
    }
    if (next_escape != stream.escapes.size()) throw CorruptionError("decode_latent: unused bypass values");
    return out;
}

}  // namespace splitcomp::codec
