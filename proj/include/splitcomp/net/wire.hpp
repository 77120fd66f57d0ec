// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splitcomp/model/split_model.hpp"

namespace splitcomp::net {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'L', 'D', 'N', '1'};
inline constexpr std::size_t kFrameHeaderBytes = 10;
/// Mask bit asking the server to echo the decoded symbols.
inline constexpr std::uint8_t kEchoBit = 0x80;
inline constexpr std::uint8_t kEchoSection = 0x80;

enum class MessageType : std::uint8_t { Request = 0, Response = 1, Error = 2 };

enum class ErrorCode : std::uint16_t {
    BadMagic = 1,
    Truncated = 2,
    UnknownType = 3,
    BadBitstream = 4,
    UnknownModel = 5,
    Corruption = 6,
    Internal = 7,
    Oversized = 8,
    BadTaskMask = 9,
    UnexpectedType = 10,
};

const char* error_code_name(ErrorCode c) noexcept;

struct Frame {
    MessageType type = MessageType::Request;
    std::uint8_t task_mask = 0;
    std::vector<std::uint8_t> payload;

    std::vector<std::uint8_t> serialize() const;
};

struct FrameHeader {
    std::array<std::uint8_t, 4> magic;
    std::uint8_t type;
    std::uint8_t task_mask;
    std::uint32_t length;

    bool magic_ok() const noexcept { return magic == kFrameMagic; }
    bool type_known() const noexcept { return type <= 2; }
};

FrameHeader parse_frame_header(std::span<const std::uint8_t, kFrameHeaderBytes> bytes) noexcept;

/// Whole-buffer parse for tests and tools. Throws ProtocolError on any
/// structural problem (magic, type, length mismatch).
Frame parse_frame(std::span<const std::uint8_t> bytes);

Frame make_error_frame(ErrorCode code, const std::string& message);

struct ErrorInfo {
    ErrorCode code;
    std::string message;
};
ErrorInfo parse_error_payload(std::span<const std::uint8_t> payload);  // ProtocolError

/// Detection as carried on the wire: float box, 16-bit quantized score.
struct WireDetection {
    std::array<float, 4> box;
    std::uint16_t score;
    friend bool operator==(const WireDetection&, const WireDetection&) = default;
};

struct ClassResult {
    std::uint16_t label;
    float score;  // softmax probability of the label
    friend bool operator==(const ClassResult&, const ClassResult&) = default;
};

struct TaskResults {
    std::optional<ClassResult> classification;
    std::optional<std::vector<WireDetection>> detections;
    std::optional<model::SegmentationMap> segmentation;
    std::optional<Tensor> echo;  // decoded symbols, debug mode only

    friend bool operator==(const TaskResults&, const TaskResults&) = default;
};

/// Reduces in-process predictions to what the wire carries.
TaskResults results_from_predictions(const model::Predictions& p);

std::vector<std::uint8_t> serialize_results(const TaskResults& r);
TaskResults parse_results(std::span<const std::uint8_t> payload);  // ProtocolError

/// Run-length coding of a class map as (class, run) pairs.
std::vector<std::uint8_t> encode_class_map(const model::SegmentationMap& map);
model::SegmentationMap decode_class_map(std::span<const std::uint8_t> bytes);

}  // namespace splitcomp::net
