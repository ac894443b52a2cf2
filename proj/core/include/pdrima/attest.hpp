#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "pdrima/appraise.hpp"
#include "pdrima/sml.hpp"

namespace pdrima::attest {

using Nonce = std::array<std::uint8_t, 32>;

struct Challenge {
    Nonce nonce{};
    static Challenge fresh() { return Challenge{random_nonce()}; }
};

/// Nonce-bound snapshot of the device's vPCRs and SML.
struct AttestationEvidence {
    Nonce nonce{};
    std::array<Digest, 4> vpcr_snapshot{};
    std::vector<sml::SmlEntry> sml_entries;
};

std::vector<std::uint8_t> encode_evidence(const AttestationEvidence& ae);
AttestationEvidence decode_evidence(std::span<const std::uint8_t> bytes);

/// Signature over H(encode(AE)).
struct Quote {
    Signature signature{};
};

Quote make_quote(const KeyPair& sk_attest, std::span<const std::uint8_t> ae_bytes);

struct DeviceResponse {
    AttestationEvidence evidence;
    std::vector<std::uint8_t> evidence_bytes; // the exact signed bytes
    Quote quote;
};

/// Atomic snapshot of (entries, bank) at call time.
DeviceResponse device_respond(const Challenge& challenge, const sml::Sml& sml,
                              const sml::VpcrBank& bank, const KeyPair& sk_attest);

enum class FindingCode : std::uint8_t {
    QuoteInvalid = 0,
    NonceMismatch = 1,
    NonceReplayed = 2,
    ChainBroken = 3,
    VpcrMismatch = 4,
    GoldenMismatch = 5,
    Rollback = 6,
    UnknownComponent = 7,
    AppraisalFailureLogged = 8,
};

const char* finding_code_name(FindingCode c);

struct Finding {
    FindingCode code;
    std::string detail;
};

enum class Decision : std::uint8_t { Trusted = 0, Untrusted = 1, Invalid = 2 };

const char* decision_name(Decision d);

struct Verdict {
    Decision decision = Decision::Trusted;
    std::vector<Finding> findings;

    bool has(FindingCode c) const {
        for (const auto& f : findings)
            if (f.code == c) return true;
        return false;
    }
};

/// Replay cache of accepted nonces; access must be serialized by the caller.
using NonceCache = std::set<Nonce>;

/// TTP validation over the raw evidence bytes, in order: quote signature,
/// nonce freshness, chain verification, vPCR replay, RML appraisal of
/// every static entry, and surfacing of device-logged failures.
/// Quote/nonce failures make the evidence unusable (Invalid); authentic
/// evidence with bad content is Untrusted.
Verdict ttp_validate(std::span<const std::uint8_t> ae_bytes, const Quote& quote,
                     const Nonce& expected_nonce, const PublicKey& pk_attest,
                     const appraise::Rml& rml, NonceCache& nonce_cache);

} // namespace pdrima::attest
