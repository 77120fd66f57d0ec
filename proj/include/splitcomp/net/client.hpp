// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "splitcomp/codec/entropy_model.hpp"
#include "splitcomp/model/split_model.hpp"
#include "splitcomp/net/rate_shaper.hpp"
#include "splitcomp/net/wire.hpp"

namespace splitcomp::net {

/// One client-side TCP connection speaking the frame protocol.
class Connection {
public:
    Connection(const std::string& address, double timeout_s = 60);
    ~Connection();
    Connection(Connection&&) noexcept;
    Connection& operator=(Connection&&) noexcept;

    /// Sends raw bytes, in chunks through `shaper` when given. Returns the
    /// seconds spent sending.
    double send_bytes(std::span<const std::uint8_t> bytes, RateShaper* shaper = nullptr);
    /// Half-close: the server sees end-of-stream after the bytes already sent.
    void shutdown_write();
    /// Reads one frame. TimeoutError past the deadline, ProtocolError on a
    /// malformed or missing frame.
    Frame receive_frame();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ClientOptions {
    double timeout_s = 60;
    double rate_bps = 100'000;
    double bucket_bits = RateShaper::kDefaultCapacityBits;
    bool shape_uplink = true;
    bool include_downlink = false;  // also charge the response against the link
    bool echo = false;              // ask the server to return decoded symbols
    Clock* clock = nullptr;         // shaper clock; steady clock when null
};

struct Timing {
    double preprocess_s = 0;
    double encode_s = 0;         // encoder forward plus entropy coding
    double tx_s = 0;             // shaped uplink of the request frame
    double downlink_s = 0;       // shaped downlink when enabled
    double round_trip_s = 0;     // first byte sent to response received
};

struct ClientResult {
    TaskResults results;
    Timing timing;
    Tensor latent;  // client-side quantized latent
    std::size_t request_bytes = 0;
    std::size_t response_bytes = 0;
};

/// Preprocess, encode, send one request, parse the response. Error frames
/// surface as ProtocolError carrying the server's code and message.
ClientResult client_infer(const std::string& address, const Tensor& image, model::TaskSet tasks,
                          const model::SplitModel& model, const codec::EntropyModel& entropy,
                          const ClientOptions& opts = {});

/// The request frame client_infer would send for an already-quantized latent.
Frame make_request(const Tensor& latent, model::TaskSet tasks, const codec::EntropyModel& entropy, bool echo);

}  // namespace splitcomp::net
