// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace splitcomp::net::detail {

/// Owning POSIX socket descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(o.release()) {}
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    int release() noexcept {
        const int f = fd_;
        fd_ = -1;
        return f;
    }
    void close() noexcept;

private:
    int fd_ = -1;
};

enum class ReadStatus { Ok, Eof, Partial, Timeout };

/// Reads exactly buf.size() bytes. Eof means nothing was read before the
/// peer closed; Partial means the peer closed mid-buffer. A negative
/// deadline waits forever. Throws IoError on socket errors.
ReadStatus read_exact(int fd, std::span<std::uint8_t> buf, double deadline, std::size_t* got = nullptr);

/// Writes everything or throws IoError / TimeoutError.
void write_all(int fd, std::span<const std::uint8_t> buf, double deadline);

double monotonic_now();

/// "host:port" → (host, port). ConfigError on malformed input.
std::pair<std::string, std::uint16_t> split_address(const std::string& address);

Socket listen_tcp(const std::string& host, std::uint16_t port, int backlog);
Socket connect_tcp(const std::string& host, std::uint16_t port, double timeout_s);
std::uint16_t local_port(int fd);

}  // namespace splitcomp::net::detail
