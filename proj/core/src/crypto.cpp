#include "pdrima/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

namespace pdrima {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
    });
}

static_assert(crypto_hash_sha256_BYTES == 32);
static_assert(crypto_sign_BYTES == 64);
static_assert(crypto_sign_PUBLICKEYBYTES == 32);
static_assert(crypto_sign_SECRETKEYBYTES == 64);

} // namespace

Digest hash(std::span<const std::uint8_t> data) {
    ensure_sodium();
    Digest d;
    crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
    return d;
}

Digest hash(const std::vector<std::uint8_t>& data) {
    return hash(std::span<const std::uint8_t>(data));
}

Digest hash(const std::string& data) {
    return hash(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Hasher::Hasher() {
    ensure_sodium();
    static_assert(sizeof(crypto_hash_sha256_state) <= sizeof(state_));
    crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

void Hasher::update(std::span<const std::uint8_t> data) {
    crypto_hash_sha256_update(
        reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
        data.data(), data.size());
}

Digest Hasher::finish() {
    Digest d;
    crypto_hash_sha256_final(
        reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
        d.bytes.data());
    return d;
}

Digest hash_pair(const Digest& a, const Digest& b) {
    std::array<std::uint8_t, 64> buf;
    std::memcpy(buf.data(), a.bytes.data(), 32);
    std::memcpy(buf.data() + 32, b.bytes.data(), 32);
    return hash(std::span<const std::uint8_t>(buf));
}

Signature sign(const KeyPair& key, std::span<const std::uint8_t> message) {
    ensure_sodium();
    if (key.secret.size() != crypto_sign_SECRETKEYBYTES)
        throw MissingSecretKey("key pair has no secret material");
    Signature sig;
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         key.secret.data());
    return sig;
}

bool verify(const PublicKey& pk, std::span<const std::uint8_t> message,
            const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), message.data(),
                                       message.size(), pk.data()) == 0;
}

KeyPair generate_keypair(KeyRole role) {
    ensure_sodium();
    KeyPair kp;
    kp.role = role;
    kp.secret.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_keypair(kp.public_key.data(), kp.secret.data());
    return kp;
}

KeyPair generate_keypair(KeyRole role, std::uint64_t seed) {
    ensure_sodium();
    // Expand (role, seed) into the 32-byte Ed25519 seed.
    std::array<std::uint8_t, 9> material{};
    material[0] = std::uint8_t(role);
    for (int i = 0; i < 8; ++i)
        material[1 + i] = std::uint8_t(seed >> (56 - 8 * i));
    Digest ed_seed = hash(std::span<const std::uint8_t>(material));

    KeyPair kp;
    kp.role = role;
    kp.secret.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret.data(),
                             ed_seed.bytes.data());
    return kp;
}

std::array<std::uint8_t, 32> random_nonce() {
    ensure_sodium();
    std::array<std::uint8_t, 32> n;
    randombytes_buf(n.data(), n.size());
    return n;
}

const char* key_role_name(KeyRole role) {
    switch (role) {
    case KeyRole::Attest: return "attest";
    case KeyRole::Rml: return "rml";
    case KeyRole::Ttp: return "ttp";
    case KeyRole::Verifier: return "verifier";
    case KeyRole::Device: return "device";
    }
    return "unknown";
}

} // namespace pdrima
