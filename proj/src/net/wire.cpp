// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/net/wire.hpp"

#include <algorithm>
#include <cmath>

#include "splitcomp/byte_io.hpp"
#include "splitcomp/tensor_ops.hpp"

namespace splitcomp::net {

const char* error_code_name(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::BadMagic: return "bad magic";
        case ErrorCode::Truncated: return "truncated frame";
        case ErrorCode::UnknownType: return "unknown message type";
        case ErrorCode::BadBitstream: return "bad bitstream";
        case ErrorCode::UnknownModel: return "unknown entropy model";
        case ErrorCode::Corruption: return "corrupt payload";
        case ErrorCode::Internal: return "internal error";
        case ErrorCode::Oversized: return "oversized frame";
        case ErrorCode::BadTaskMask: return "bad task mask";
        case ErrorCode::UnexpectedType: return "unexpected message type";
    }
    return "unknown error";
}

std::vector<std::uint8_t> Frame::serialize() const {
    if (payload.size() > 0xFFFFFFFFu) throw CapacityError("frame payload exceeds 4 GiB");
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.bytes(kFrameMagic);
    w.u8(static_cast<std::uint8_t>(type));
    w.u8(task_mask);
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.bytes(payload);
    return out;
}

FrameHeader parse_frame_header(std::span<const std::uint8_t, kFrameHeaderBytes> b) noexcept {
    FrameHeader h{};
    std::copy_n(b.begin(), 4, h.magic.begin());
    h.type = b[4];
    h.task_mask = b[5];
    h.length = (std::uint32_t{b[6]} << 24) | (std::uint32_t{b[7]} << 16) | (std::uint32_t{b[8]} << 8) | b[9];
    return h;
}

Frame parse_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameHeaderBytes) throw ProtocolError("frame shorter than its header");
    const FrameHeader h = parse_frame_header(bytes.first<kFrameHeaderBytes>());
    if (!h.magic_ok()) throw ProtocolError("bad frame magic");
    if (!h.type_known()) throw ProtocolError("unknown message type " + std::to_string(h.type));
    if (h.length != bytes.size() - kFrameHeaderBytes) {
        throw ProtocolError("frame length field " + std::to_string(h.length) + " does not match " +
                            std::to_string(bytes.size() - kFrameHeaderBytes) + " payload bytes");
    }
    Frame f;
    f.type = static_cast<MessageType>(h.type);
    f.task_mask = h.task_mask;
    f.payload.assign(bytes.begin() + kFrameHeaderBytes, bytes.end());
    return f;
}

Frame make_error_frame(ErrorCode code, const std::string& message) {
    Frame f;
    f.type = MessageType::Error;
    ByteWriter w(f.payload);
    w.u16(static_cast<std::uint16_t>(code));
    w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()));
    return f;
}

ErrorInfo parse_error_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() < 2) throw ProtocolError("error frame without a code");
    const auto code = static_cast<ErrorCode>((payload[0] << 8) | payload[1]);
    return {code, std::string(payload.begin() + 2, payload.end())};
}

TaskResults results_from_predictions(const model::Predictions& p) {
    TaskResults r;
    if (p.logits) {
        const Tensor probs = softmax(*p.logits);
        Index best = 0;
        probs.values().maxCoeff(&best);
        r.classification = ClassResult{static_cast<std::uint16_t>(best), static_cast<float>(probs[best])};
    }
    if (p.detections) {
        std::vector<WireDetection> dets;
        for (const auto& d : *p.detections) {
            const double s = std::clamp(static_cast<double>(d.score), 0.0, 1.0);
            dets.push_back({d.box, static_cast<std::uint16_t>(std::lround(s * 65535.0))});
        }
        r.detections = std::move(dets);
    }
    r.segmentation = p.segmentation;
    return r;
}

std::vector<std::uint8_t> encode_class_map(const model::SegmentationMap& map) {
    if (map.height > 0xFFFF || map.width > 0xFFFF) throw CapacityError("class map larger than 65535 per side");
    if (map.classes.size() != static_cast<std::size_t>(map.height * map.width)) {
        throw DimensionError("class map size does not match its height and width");
    }
    std::vector<std::pair<std::uint16_t, std::uint32_t>> runs;
    for (std::uint16_t c : map.classes) {
        if (!runs.empty() && runs.back().first == c) {
            ++runs.back().second;
        } else {
            runs.emplace_back(c, 1);
        }
    }
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.u16(static_cast<std::uint16_t>(map.height));
    w.u16(static_cast<std::uint16_t>(map.width));
    w.u32(static_cast<std::uint32_t>(runs.size()));
    for (const auto& [c, n] : runs) {
        w.u16(c);
        w.u32(n);
    }
    return out;
}

model::SegmentationMap decode_class_map(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    model::SegmentationMap map;
    map.height = r.u16();
    map.width = r.u16();
    const std::uint32_t runs = r.u32();
    const auto total = static_cast<std::size_t>(map.height * map.width);
    if (runs > r.remaining() / 6) throw CorruptionError("class map: run count exceeds the data");
    map.classes.reserve(total);
    for (std::uint32_t i = 0; i < runs; ++i) {
        const std::uint16_t c = r.u16();
        const std::uint32_t n = r.u32();
        if (n == 0 || n > total - map.classes.size()) throw CorruptionError("class map: run overflows the map");
        map.classes.insert(map.classes.end(), n, c);
    }
    if (map.classes.size() != total || r.remaining() != 0) throw CorruptionError("class map: runs do not cover the map");
    return map;
}

std::vector<std::uint8_t> serialize_results(const TaskResults& res) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    auto section = [&](std::uint8_t id, const std::vector<std::uint8_t>& body) {
        w.u8(id);
        w.u32(static_cast<std::uint32_t>(body.size()));
        w.bytes(body);
    };
    if (res.classification) {
        std::vector<std::uint8_t> b;
        ByteWriter bw(b);
        bw.u16(res.classification->label);
        bw.f32(res.classification->score);
        section(0, b);
    }
    if (res.detections) {
        if (res.detections->size() > 0xFFFF) throw CapacityError("too many detections for one section");
        std::vector<std::uint8_t> b;
        ByteWriter bw(b);
        bw.u16(static_cast<std::uint16_t>(res.detections->size()));
        for (const auto& d : *res.detections) {
            for (float v : d.box) bw.f32(v);
            bw.u16(d.score);
        }
        section(1, b);
    }
    if (res.segmentation) section(2, encode_class_map(*res.segmentation));
    if (res.echo) {
        const Tensor& z = *res.echo;
        require_rank(z, 3, "echoed latent");
        std::vector<std::uint8_t> b;
        ByteWriter bw(b);
        for (int a = 0; a < 3; ++a) bw.u16(static_cast<std::uint16_t>(z.dim(a)));
        for (Index i = 0; i < z.size(); ++i) bw.i32(static_cast<std::int32_t>(z[i]));
        section(kEchoSection, b);
    }
    return out;
}

TaskResults parse_results(std::span<const std::uint8_t> payload) {
    TaskResults res;
    try {
        ByteReader r(payload);
        while (r.remaining() > 0) {
            const std::uint8_t id = r.u8();
            const std::uint32_t len = r.u32();
            ByteReader body(r.bytes(len));
            switch (id) {
                case 0: {
                    const std::uint16_t label = body.u16();
                    res.classification = ClassResult{label, body.f32()};
                    break;
                }
                case 1: {
                    const std::uint16_t n = body.u16();
                    std::vector<WireDetection> dets(n);
                    for (auto& d : dets) {
                        for (float& v : d.box) v = body.f32();
                        d.score = body.u16();
                    }
                    res.detections = std::move(dets);
                    break;
                }
                case 2: res.segmentation = decode_class_map(body.bytes(body.remaining())); break;
                case kEchoSection: {
                    const Index C = body.u16(), H = body.u16(), W = body.u16();
                    if (static_cast<std::size_t>(C * H * W) * 4 != body.remaining()) {
                        throw CorruptionError("echo section size mismatch");
                    }
                    Tensor z({C, H, W});
                    for (Index i = 0; i < z.size(); ++i) z[i] = body.i32();
                    res.echo = std::move(z);
                    break;
                }
                default: throw ProtocolError("unknown result section " + std::to_string(id));
            }
            if (body.remaining() != 0) throw ProtocolError("trailing bytes in result section " + std::to_string(id));
        }
    } catch (const CorruptionError& e) {
        throw ProtocolError(std::string("malformed response: ") + e.what());
    }
    return res;
}

}  // namespace splitcomp::net
