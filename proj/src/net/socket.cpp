// SPDX-License-Identifier: Apache-2.0
#include "socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>

#include "splitcomp/error.hpp"

namespace splitcomp::net::detail {

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.release();
    }
    return *this;
}

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

double monotonic_now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Waits for `events`; false on deadline.
bool wait_for(int fd, short events, double deadline) {
    for (;;) {
        int timeout_ms = -1;
        if (deadline >= 0) {
            const double left = deadline - monotonic_now();
            if (left <= 0) return false;
            timeout_ms = static_cast<int>(std::ceil(left * 1000.0));
        }
        pollfd p{fd, events, 0};
        const int rc = ::poll(&p, 1, timeout_ms);
        if (rc > 0) return true;
        if (rc == 0) continue;  // re-check the deadline
        if (errno != EINTR) throw IoError(errno_text("poll"));
    }
}

}  // namespace

ReadStatus read_exact(int fd, std::span<std::uint8_t> buf, double deadline, std::size_t* got) {
    std::size_t done = 0;
    while (done < buf.size()) {
        if (!wait_for(fd, POLLIN, deadline)) {
            if (got) *got = done;
            return ReadStatus::Timeout;
        }
        const ssize_t n = ::recv(fd, buf.data() + done, buf.size() - done, 0);
        if (n == 0) {
            if (got) *got = done;
            return done == 0 ? ReadStatus::Eof : ReadStatus::Partial;
        }
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            if (errno == ECONNRESET) {
                if (got) *got = done;
                return done == 0 ? ReadStatus::Eof : ReadStatus::Partial;
            }
            throw IoError(errno_text("recv"));
        }
        done += static_cast<std::size_t>(n);
    }
    if (got) *got = done;
    return ReadStatus::Ok;
}

void write_all(int fd, std::span<const std::uint8_t> buf, double deadline) {
    std::size_t done = 0;
    while (done < buf.size()) {
        if (!wait_for(fd, POLLOUT, deadline)) throw TimeoutError("timed out while sending");
        const ssize_t n = ::send(fd, buf.data() + done, buf.size() - done, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw IoError(errno_text("send"));
        }
        done += static_cast<std::size_t>(n);
    }
}

std::pair<std::string, std::uint16_t> split_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size()) {
        throw ConfigError("address '" + address + "' is not host:port");
    }
    const std::string port_text = address.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (*end != '\0' || port < 0 || port > 65535) throw ConfigError("bad port in '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.empty()) host = "127.0.0.1";
    return {host, static_cast<std::uint16_t>(port)};
}

namespace {

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0) throw IoError("cannot resolve '" + host + "': " + ::gai_strerror(rc));
    return res;
}

}  // namespace

Socket listen_tcp(const std::string& host, std::uint16_t port, int backlog) {
    addrinfo* res = resolve(host, port, true);
    Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    if (!s.valid()) {
        ::freeaddrinfo(res);
        throw IoError(errno_text("socket"));
    }
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const int rc = ::bind(s.fd(), res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0) throw IoError(errno_text(("bind " + host + ":" + std::to_string(port)).c_str()));
    if (::listen(s.fd(), backlog) != 0) throw IoError(errno_text("listen"));
    return s;
}

Socket connect_tcp(const std::string& host, std::uint16_t port, double timeout_s) {
    addrinfo* res = resolve(host, port, false);
    Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    if (!s.valid()) {
        ::freeaddrinfo(res);
        throw IoError(errno_text("socket"));
    }
    const int flags = ::fcntl(s.fd(), F_GETFL, 0);
    ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0 && errno != EINPROGRESS) throw IoError(errno_text("connect"));
    if (rc != 0) {
        if (!wait_for(s.fd(), POLLOUT, monotonic_now() + timeout_s)) throw TimeoutError("connect timed out");
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) {
            errno = err;
            throw IoError(errno_text("connect"));
        }
    }
    const int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

std::uint16_t local_port(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) throw IoError(errno_text("getsockname"));
    return ntohs(addr.sin_port);
}

}  // namespace splitcomp::net::detail
