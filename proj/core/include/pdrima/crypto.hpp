#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdrima/digest.hpp"

namespace pdrima {

struct MissingSecretKey : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Signature = std::array<std::uint8_t, 64>;
using PublicKey = std::array<std::uint8_t, 32>;

enum class KeyRole : std::uint8_t { Attest, Rml, Ttp, Verifier, Device };

/// Ed25519 key pair. `secret` is empty for verify-only keys.
struct KeyPair {
    KeyRole role = KeyRole::Attest;
    PublicKey public_key{};
    std::vector<std::uint8_t> secret; // 64 bytes when present

    bool has_secret() const { return !secret.empty(); }
};

/// SHA-256 of the input; empty input allowed.
Digest hash(std::span<const std::uint8_t> data);
Digest hash(const std::vector<std::uint8_t>& data);
Digest hash(const std::string& data);

/// Incremental SHA-256, for large segment data.
class Hasher {
public:
    Hasher();
    void update(std::span<const std::uint8_t> data);
    Digest finish();

private:
    alignas(16) std::array<std::uint8_t, 208> state_{}; // fits crypto_hash_sha256_state
};

/// H(a || b) for the chain/extend rules.
Digest hash_pair(const Digest& a, const Digest& b);

/// Deterministic Ed25519 signature; throws MissingSecretKey.
Signature sign(const KeyPair& key, std::span<const std::uint8_t> message);
bool verify(const PublicKey& pk, std::span<const std::uint8_t> message,
            const Signature& sig);

/// Fresh random key pair, or a reproducible one from a 64-bit seed.
KeyPair generate_keypair(KeyRole role);
KeyPair generate_keypair(KeyRole role, std::uint64_t seed);

std::array<std::uint8_t, 32> random_nonce();

const char* key_role_name(KeyRole role);

} // namespace pdrima
