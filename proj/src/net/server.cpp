// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/net/server.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <list>
#include <mutex>
#include <thread>

#include "socket.hpp"
#include "splitcomp/codec/bitstream.hpp"
#include "splitcomp/codec/cdf_table.hpp"

namespace splitcomp::net {

struct RequestHandler::Codec {
    std::map<std::uint16_t, std::pair<codec::EntropyModel, codec::CdfTables>> models;
};

RequestHandler::RequestHandler(model::SplitModel model, codec::EntropyRegistry registry) : model_(std::move(model)) {
    auto c = std::make_shared<Codec>();
    for (auto& [id, em] : registry) {
        em.validate();
        c->models.emplace(id, std::make_pair(em, codec::build_cdf_tables(em)));
    }
    codec_ = std::move(c);
}

Frame RequestHandler::handle(const Frame& request) const {
    if (request.type != MessageType::Request) {
        return make_error_frame(ErrorCode::UnexpectedType, "server accepts request frames only");
    }
    const std::uint8_t task_bits = request.task_mask & static_cast<std::uint8_t>(~kEchoBit);
    model::TaskSet tasks;
    try {
        tasks = model::TaskSet::from_mask(task_bits);
        for (model::Task t : model::kAllTasks) {
            if (tasks.contains(t) && !model_.supports(t)) {
                throw TaskError(std::string("model has no ") + model::task_name(t) + " head");
            }
        }
    } catch (const TaskError& e) {
        return make_error_frame(ErrorCode::BadTaskMask, e.what());
    }

    try {
        const codec::Bitstream bs = codec::Bitstream::parse(request.payload);
        const auto it = codec_->models.find(bs.model_id);
        if (it == codec_->models.end()) {
            return make_error_frame(ErrorCode::UnknownModel, "no entropy model with id " + std::to_string(bs.model_id));
        }
        // Check the declared shape before decoding so a forged header cannot
        // make the server allocate an arbitrary tensor.
        const Shape& want = model_.latent_shape();
        const Shape declared{bs.shape[0], bs.shape[1], bs.shape[2]};
        if (declared != want) {
            return make_error_frame(ErrorCode::BadBitstream, "latent shape " + shape_to_string(declared) +
                                                                 " does not match the model's " + shape_to_string(want));
        }
        const Tensor latent = codec::decode_latent(bs, it->second.first, it->second.second);
        TaskResults results = results_from_predictions(model_.run_tail(latent, tasks));
        if (request.task_mask & kEchoBit) results.echo = latent;
        Frame resp;
        resp.type = MessageType::Response;
        resp.task_mask = request.task_mask;
        resp.payload = serialize_results(results);
        return resp;
    } catch (const FormatError& e) {
        return make_error_frame(ErrorCode::BadBitstream, e.what());
    } catch (const ModelError& e) {
        return make_error_frame(ErrorCode::UnknownModel, e.what());
    } catch (const CorruptionError& e) {
        return make_error_frame(ErrorCode::Corruption, e.what());
    } catch (const DimensionError& e) {
        return make_error_frame(ErrorCode::BadBitstream, e.what());
    } catch (const std::exception& e) {
        return make_error_frame(ErrorCode::Internal, e.what());
    }
}

struct Server::Impl {
    RequestHandler handler;
    ServerOptions opts;
    detail::Socket listener;
    std::uint16_t port = 0;
    std::atomic<bool> stopping{false};
    std::atomic<bool> alive{false};
    std::thread acceptor;

    struct Conn {
        std::thread thread;
        int fd;
        std::atomic<bool> done{false};
    };
    mutable std::mutex mu;
    std::list<Conn> conns;
    ServerStats stats;

    Impl(model::SplitModel m, codec::EntropyRegistry r, ServerOptions o)
        : handler(std::move(m), std::move(r)), opts(std::move(o)) {}

    void count(std::uint64_t ServerStats::*field) {
        std::lock_guard lock(mu);
        ++(stats.*field);
    }

    bool send_frame(int fd, const Frame& f) {
        count(f.type == MessageType::Error ? &ServerStats::errors : &ServerStats::responses);
        try {
            detail::write_all(fd, f.serialize(), detail::monotonic_now() + opts.idle_timeout_s);
        } catch (const Error&) {
            return false;
        }
        return true;
    }

    bool send_error(int fd, ErrorCode code, const std::string& msg) { return send_frame(fd, make_error_frame(code, msg)); }

    // The descriptor is closed by reap() after the join, so stop() can never
    // shut down a number that has been reused.
    void serve_connection(int fd) {
        std::array<std::uint8_t, kFrameHeaderBytes> hdr{};
        std::vector<std::uint8_t> payload;
        try {
            while (!stopping) {
                const double deadline = detail::monotonic_now() + opts.idle_timeout_s;
                const auto st = detail::read_exact(fd, hdr, deadline);
                if (st == detail::ReadStatus::Eof || st == detail::ReadStatus::Timeout) return;
                if (st == detail::ReadStatus::Partial) {
                    send_error(fd, ErrorCode::Truncated, "connection closed inside a frame header");
                    return;
                }
                const FrameHeader h = parse_frame_header(hdr);
                if (h.length > opts.max_payload) {
                    // The stream cannot be resynchronised without reading the payload.
                    send_error(fd, ErrorCode::Oversized,
                               "payload of " + std::to_string(h.length) + " bytes exceeds the limit");
                    return;
                }
                payload.resize(h.length);
                const auto pst = detail::read_exact(fd, payload, deadline);
                if (pst != detail::ReadStatus::Ok) {
                    send_error(fd, ErrorCode::Truncated,
                               "frame announced " + std::to_string(h.length) + " payload bytes but the stream ended");
                    return;
                }
                bool ok = true;
                if (!h.magic_ok()) {
                    ok = send_error(fd, ErrorCode::BadMagic, "frame magic is not LDN1");
                } else if (!h.type_known()) {
                    ok = send_error(fd, ErrorCode::UnknownType, "unknown message type " + std::to_string(h.type));
                } else {
                    Frame req;
                    req.type = static_cast<MessageType>(h.type);
                    req.task_mask = h.task_mask;
                    req.payload = std::move(payload);
                    ok = send_frame(fd, handler.handle(req));
                    payload = std::move(req.payload);
                }
                if (!ok) return;
            }
        } catch (const std::exception&) {
            // Socket-level failure on this connection only.
        }
    }

    void finish_connection(int fd) {
        serve_connection(fd);
        ::shutdown(fd, SHUT_RDWR);
    }

    void reap(bool all) {
        std::list<Conn> finished;
        {
            std::lock_guard lock(mu);
            for (auto it = conns.begin(); it != conns.end();) {
                if (all || it->done) {
                    auto next = std::next(it);
                    finished.splice(finished.end(), conns, it);
                    it = next;
                } else {
                    ++it;
                }
            }
        }
        for (auto& c : finished) {
            c.thread.join();
            ::close(c.fd);
        }
    }

    void accept_loop() {
        while (!stopping) {
            pollfd p{listener.fd(), POLLIN, 0};
            const int rc = ::poll(&p, 1, 100);
            reap(false);
            if (rc <= 0) continue;
            const int fd = ::accept(listener.fd(), nullptr, nullptr);
            if (fd < 0) continue;
            count(&ServerStats::connections);
            std::lock_guard lock(mu);
            auto& c = conns.emplace_back();
            c.fd = fd;
            c.thread = std::thread([this, &c, fd] {
                finish_connection(fd);
                c.done = true;
            });
        }
    }

    void shutdown() {
        if (stopping.exchange(true)) return;
        if (acceptor.joinable()) acceptor.join();
        {
            std::lock_guard lock(mu);
            for (auto& c : conns) {
                if (!c.done) ::shutdown(c.fd, SHUT_RDWR);
            }
        }
        reap(true);
        listener.close();
        alive = false;
    }
};

Server::Server(model::SplitModel model, codec::EntropyRegistry registry, ServerOptions opts)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(registry), std::move(opts))) {
    impl_->listener = detail::listen_tcp(impl_->opts.host, impl_->opts.port, 128);
    impl_->port = detail::local_port(impl_->listener.fd());
    impl_->alive = true;
    impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const noexcept { return impl_->port; }

std::string Server::address() const { return impl_->opts.host + ":" + std::to_string(impl_->port); }

bool Server::running() const noexcept { return impl_->alive && !impl_->stopping; }

ServerStats Server::stats() const {
    std::lock_guard lock(impl_->mu);
    return impl_->stats;
}

void Server::stop() { impl_->shutdown(); }

std::unique_ptr<Server> serve(model::SplitModel model, codec::EntropyRegistry registry, ServerOptions opts) {
    return std::make_unique<Server>(std::move(model), std::move(registry), std::move(opts));
}

}  // namespace splitcomp::net
