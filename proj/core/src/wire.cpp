#include "pdrima/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "pdrima/codec.hpp"

namespace pdrima::wire {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'D', 'R', 'A'};
constexpr std::size_t kMaxPayload = 64 * 1024 * 1024;

void read_exact(int fd, std::uint8_t* buf, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, buf + got, len - got, 0);
        if (n == 0)
            throw MalformedResponse("connection closed mid-frame");
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw Timeout("read timed out");
            throw TransportError(std::string("recv: ") + std::strerror(errno));
        }
        got += std::size_t(n);
    }
}

void write_all(int fd, const std::uint8_t* buf, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        ssize_t n = ::send(fd, buf + sent, len - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("send: ") + std::strerror(errno));
        }
        sent += std::size_t(n);
    }
}

void set_timeout(int fd, int timeout_ms) {
    if (timeout_ms <= 0) return;
    timeval tv;
    tv.tv_sec = timeout_ms / 1000;
    tv.tv_usec = (timeout_ms % 1000) * 1000;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

struct FdGuard {
    int fd;
    ~FdGuard() {
        if (fd >= 0) ::close(fd);
    }
    int release() {
        int f = fd;
        fd = -1;
        return f;
    }
};

} // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
    Encoder e;
    e.raw(kMagic);
    e.u8(kProtocolVersion);
    e.u8(std::uint8_t(f.type));
    e.bytes(f.payload);
    return e.take();
}

Frame read_frame(int fd) {
    std::uint8_t header[10];
    read_exact(fd, header, sizeof(header));
    if (std::memcmp(header, kMagic, 4) != 0)
        throw MalformedResponse("bad frame magic");
    if (header[4] != kProtocolVersion)
        throw MalformedResponse("unsupported protocol version");
    std::uint8_t type = header[5];
    if (type < std::uint8_t(MessageType::Challenge) ||
        type > std::uint8_t(MessageType::Error))
        throw MalformedResponse("unknown message type");
    std::uint32_t len = std::uint32_t(header[6]) << 24 |
                        std::uint32_t(header[7]) << 16 |
                        std::uint32_t(header[8]) << 8 | std::uint32_t(header[9]);
    if (len > kMaxPayload) throw MalformedResponse("payload too large");

    Frame f;
    f.type = MessageType(type);
    f.payload.resize(len);
    if (len) read_exact(fd, f.payload.data(), len);
    return f;
}

void write_frame(int fd, const Frame& f) {
    auto bytes = encode_frame(f);
    write_all(fd, bytes.data(), bytes.size());
}

std::vector<std::uint8_t> encode_response_payload(const attest::DeviceResponse& r) {
    std::vector<std::uint8_t> out = r.evidence_bytes;
    out.insert(out.end(), r.quote.signature.begin(), r.quote.signature.end());
    return out;
}

ResponsePayload decode_response_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() < 64)
        throw MalformedResponse("response payload shorter than a quote");
    ResponsePayload rp;
    rp.evidence_bytes.assign(payload.begin(), payload.end() - 64);
    std::memcpy(rp.quote.signature.data(), payload.data() + payload.size() - 64, 64);
    return rp;
}

ChallengeResult challenge_device(const std::string& host, std::uint16_t port,
                                 int timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string port_str = std::to_string(port);
    if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0)
        throw TransportError("cannot resolve " + host);

    int fd = -1;
    for (addrinfo* p = res; p; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0) continue;
        set_timeout(fd, timeout_ms);
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINPROGRESS ||
            errno == ETIMEDOUT)
            throw Timeout("connect timed out: " + host + ":" + port_str);
        throw TransportError("cannot connect to " + host + ":" + port_str);
    }
    FdGuard guard{fd};

    ChallengeResult result;
    attest::Challenge ch = attest::Challenge::fresh();
    result.nonce = ch.nonce;

    Frame req;
    req.type = MessageType::Challenge;
    req.payload.assign(ch.nonce.begin(), ch.nonce.end());
    write_frame(fd, req);

    Frame resp = read_frame(fd);
    if (resp.type == MessageType::Error)
        throw TransportError("device returned an error frame");
    if (resp.type != MessageType::Response)
        throw MalformedResponse("expected a response frame");
    result.response = decode_response_payload(resp.payload);
    return result;
}

AttestationServer::AttestationServer(std::uint16_t port, Responder responder)
    : port_(port), responder_(std::move(responder)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw TransportError("cannot create listen socket");

    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(listen_fd_);
        throw TransportError("cannot bind port " + std::to_string(port));
    }
    if (::listen(listen_fd_, 8) < 0) {
        ::close(listen_fd_);
        throw TransportError("listen failed");
    }
    // Recover the actual port when 0 was requested.
    socklen_t len = sizeof(addr);
    if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
        port_ = ntohs(addr.sin_port);
}

AttestationServer::~AttestationServer() { stop(); }

void AttestationServer::serve(std::size_t max_sessions) {
    std::size_t done = 0;
    while (max_sessions == 0 || done < max_sessions) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return; // listen socket closed by stop()
        }
        FdGuard guard{fd};
        set_timeout(fd, 10000);
        try {
            Frame req = read_frame(fd);
            if (req.type != MessageType::Challenge ||
                req.payload.size() != 32) {
                write_frame(fd, Frame{MessageType::Error, {}});
            } else {
                attest::Challenge ch;
                std::memcpy(ch.nonce.data(), req.payload.data(), 32);
                auto resp = responder_(ch);
                write_frame(fd,
                            Frame{MessageType::Response,
                                  encode_response_payload(resp)});
            }
        } catch (const std::exception&) {
            // Session-level faults end the session, never the server.
        }
        ++done;
    }
}

void AttestationServer::stop() {
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
}

} // namespace pdrima::wire
