// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "splitcomp/codec/entropy_model_io.hpp"
#include "splitcomp/model/split_model.hpp"
#include "splitcomp/net/wire.hpp"

namespace splitcomp::net {

struct ServerOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;                 // 0 picks a free port
    std::uint32_t max_payload = 16u << 20;  // larger frames get Oversized and a close
    double idle_timeout_s = 60;             // per connection, between frames
};

struct ServerStats {
    std::uint64_t connections = 0;
    std::uint64_t responses = 0;
    std::uint64_t errors = 0;
};

/// Turns one request frame into a response or error frame. Never throws.
/// Exposed separately so the request path can be tested without sockets.
class RequestHandler {
public:
    RequestHandler(model::SplitModel model, codec::EntropyRegistry registry);

    Frame handle(const Frame& request) const;
    const model::SplitModel& model() const noexcept { return model_; }

private:
    struct Codec;
    model::SplitModel model_;
    std::shared_ptr<const Codec> codec_;
};

/// TCP server, one thread per connection. Stops and joins on destruction.
class Server {
public:
    Server(model::SplitModel model, codec::EntropyRegistry registry, ServerOptions opts = {});
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const noexcept;
    std::string address() const;
    bool running() const noexcept;
    ServerStats stats() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::unique_ptr<Server> serve(model::SplitModel model, codec::EntropyRegistry registry, ServerOptions opts = {});

}  // namespace splitcomp::net
