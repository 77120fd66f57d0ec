// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/net/client.hpp"

#include <sys/socket.h>

#include <algorithm>

#include "socket.hpp"
#include "splitcomp/codec/bitstream.hpp"

namespace splitcomp::net {

struct Connection::Impl {
    detail::Socket sock;
    double timeout_s;
};

Connection::Connection(const std::string& address, double timeout_s) : impl_(std::make_unique<Impl>()) {
    const auto [host, port] = detail::split_address(address);
    impl_->sock = detail::connect_tcp(host, port, timeout_s);
    impl_->timeout_s = timeout_s;
}

Connection::~Connection() = default;
Connection::Connection(Connection&&) noexcept = default;
Connection& Connection::operator=(Connection&&) noexcept = default;

double Connection::send_bytes(std::span<const std::uint8_t> bytes, RateShaper* shaper) {
    const double start = detail::monotonic_now();
    const double deadline = start + impl_->timeout_s;
    if (!shaper) {
        detail::write_all(impl_->sock.fd(), bytes, deadline);
        return detail::monotonic_now() - start;
    }
    const auto chunk = static_cast<std::size_t>(std::max(1.0, std::min(1024.0, shaper->capacity_bits() / 8)));
    for (std::size_t off = 0; off < bytes.size(); off += chunk) {
        const auto piece = bytes.subspan(off, std::min(chunk, bytes.size() - off));
        shaper->acquire(piece.size());
        if (detail::monotonic_now() > deadline) throw TimeoutError("send exceeded the client timeout");
        detail::write_all(impl_->sock.fd(), piece, deadline);
    }
    return detail::monotonic_now() - start;
}

void Connection::shutdown_write() { ::shutdown(impl_->sock.fd(), SHUT_WR); }

Frame Connection::receive_frame() {
    const double deadline = detail::monotonic_now() + impl_->timeout_s;
    std::array<std::uint8_t, kFrameHeaderBytes> hdr{};
    auto st = detail::read_exact(impl_->sock.fd(), hdr, deadline);
    if (st == detail::ReadStatus::Timeout) throw TimeoutError("no response within the client timeout");
    if (st != detail::ReadStatus::Ok) throw ProtocolError("server closed the connection without a response");
    const FrameHeader h = parse_frame_header(hdr);
    if (!h.magic_ok() || !h.type_known()) throw ProtocolError("server sent a malformed frame header");
    Frame f;
    f.type = static_cast<MessageType>(h.type);
    f.task_mask = h.task_mask;
    f.payload.resize(h.length);
    st = detail::read_exact(impl_->sock.fd(), f.payload, deadline);
    if (st == detail::ReadStatus::Timeout) throw TimeoutError("response payload timed out");
    if (st != detail::ReadStatus::Ok) throw ProtocolError("response truncated");
    return f;
}

Frame make_request(const Tensor& latent, model::TaskSet tasks, const codec::EntropyModel& entropy, bool echo) {
    Frame f;
    f.type = MessageType::Request;
    f.task_mask = static_cast<std::uint8_t>(tasks.mask() | (echo ? kEchoBit : 0));
    f.payload = codec::encode_latent(latent, entropy).serialize();
    return f;
}

ClientResult client_infer(const std::string& address, const Tensor& image, model::TaskSet tasks,
                          const model::SplitModel& model, const codec::EntropyModel& entropy,
                          const ClientOptions& opts) {
    if (model.entropy_model_id() != entropy.id) {
        throw ModelError("model expects entropy model " + std::to_string(model.entropy_model_id()) + ", got " +
                         std::to_string(entropy.id));
    }
    ClientResult out;
    double t0 = detail::monotonic_now();
    const Tensor input = model::preprocess(image, model.input_shape());
    double t1 = detail::monotonic_now();
    out.timing.preprocess_s = t1 - t0;

    out.latent = model.encode(input);
    const std::vector<std::uint8_t> request = make_request(out.latent, tasks, entropy, opts.echo).serialize();
    out.request_bytes = request.size();
    t0 = detail::monotonic_now();
    out.timing.encode_s = t0 - t1;

    Connection conn(address, opts.timeout_s);
    RateShaper shaper(opts.rate_bps, opts.bucket_bits, opts.clock);
    const double sent_at = detail::monotonic_now();
    out.timing.tx_s = conn.send_bytes(request, opts.shape_uplink ? &shaper : nullptr);
    const Frame resp = conn.receive_frame();
    out.timing.round_trip_s = detail::monotonic_now() - sent_at;
    out.response_bytes = kFrameHeaderBytes + resp.payload.size();
    if (opts.include_downlink) {
        const double d0 = detail::monotonic_now();
        shaper.acquire(out.response_bytes);
        out.timing.downlink_s = detail::monotonic_now() - d0;
        out.timing.round_trip_s += out.timing.downlink_s;
    }

    if (resp.type == MessageType::Error) {
        const ErrorInfo e = parse_error_payload(resp.payload);
        throw ProtocolError("server error " + std::to_string(static_cast<int>(e.code)) + " (" +
                            error_code_name(e.code) + "): " + e.message);
    }
    if (resp.type != MessageType::Response) throw ProtocolError("server replied with a request frame");
    out.results = parse_results(resp.payload);
    return out;
}

}  // namespace splitcomp::net
