#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdrima/attest.hpp"

namespace pdrima::wire {

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Timeout : TransportError {
    using TransportError::TransportError;
};
struct MalformedResponse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint16_t kDefaultPort = 7730;
constexpr std::uint8_t kProtocolVersion = 0x01;

enum class MessageType : std::uint8_t {
    Challenge = 0x01,
    Response = 0x02,
    Error = 0x03,
};

struct Frame {
    MessageType type;
    std::vector<std::uint8_t> payload;
};

/// "PDRA" + version + type + 4-byte big-endian length + payload.
std::vector<std::uint8_t> encode_frame(const Frame& f);

/// Blocking reads on a connected socket; throws Timeout / TransportError /
/// MalformedResponse.
Frame read_frame(int fd);
void write_frame(int fd, const Frame& f);

std::vector<std::uint8_t> encode_response_payload(const attest::DeviceResponse& r);
struct ResponsePayload {
    std::vector<std::uint8_t> evidence_bytes;
    attest::Quote quote;
};
ResponsePayload decode_response_payload(std::span<const std::uint8_t> payload);

/// One attestation exchange: connect, send a fresh challenge, read the
/// response. Returns the challenge nonce plus the raw evidence and quote.
struct ChallengeResult {
    attest::Nonce nonce{};
    ResponsePayload response;
};
ChallengeResult challenge_device(const std::string& host, std::uint16_t port,
                                 int timeout_ms);

/// Serves attestation sessions; calls `respond` once per received
/// challenge. Runs until max_sessions sessions complete (0 = forever)
/// or stop() is invoked from another thread.
class AttestationServer {
public:
    using Responder = std::function<attest::DeviceResponse(const attest::Challenge&)>;

    AttestationServer(std::uint16_t port, Responder responder);
    ~AttestationServer();

    AttestationServer(const AttestationServer&) = delete;
    AttestationServer& operator=(const AttestationServer&) = delete;

    std::uint16_t port() const { return port_; }
    /// Blocks; returns after max_sessions sessions (0 = until stop()).
    void serve(std::size_t max_sessions = 0);
    void stop();

private:
    int listen_fd_ = -1;
    std::uint16_t port_;
    Responder responder_;
};

} // namespace pdrima::wire
