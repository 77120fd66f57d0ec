// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/symbol_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "splitcomp/byte_io.hpp"

namespace splitcomp::codec {

namespace {
constexpr std::uint8_t kSymbolMagic[4] = {'S', 'Y', 'M', '1'};
}

std::vector<std::uint8_t> serialize_symbols(const Tensor& symbols) {
    require_rank(symbols, 3, "symbol file");
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.bytes(kSymbolMagic);
    for (int a = 0; a < 3; ++a) {
        if (symbols.dim(a) > std::numeric_limits<std::uint16_t>::max()) throw DimensionError("symbol file: axis too large");
        w.u16(static_cast<std::uint16_t>(symbols.dim(a)));
    }
    for (Index i = 0; i < symbols.size(); ++i) {
        const double v = symbols[i];
        if (v != std::round(v) || v < std::numeric_limits<std::int32_t>::min() ||
            v > std::numeric_limits<std::int32_t>::max()) {
            throw InputError("symbol file: values must be 32-bit integers");
        }
        w.i32(static_cast<std::int32_t>(v));
    }
    return out;
}

Tensor parse_symbols(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(kSymbolMagic, kSymbolMagic + 4, bytes.begin())) {
        throw FormatError("symbol file: bad magic");
    }
    ByteReader r(bytes.subspan(4));
    const Index C = r.u16(), H = r.u16(), W = r.u16();
    Tensor t({C, H, W});
    if (r.remaining() != static_cast<std::size_t>(t.size()) * 4) throw CorruptionError("symbol file: length mismatch");
    for (Index i = 0; i < t.size(); ++i) t[i] = r.i32();
    return t;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace splitcomp::codec
