#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdrima/crypto.hpp"
#include "pdrima/digest.hpp"

namespace pdrima::appraise {

struct DuplicateUuid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SignatureInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One golden reference: component UUID, expected digest, minimum
/// acceptable version.
struct RmlEntry {
    Uuid uuid{};
    Digest golden_hash;
    std::uint32_t min_version = 0;

    bool operator==(const RmlEntry&) const = default;
};

/// Verified reference list; immutable after load.
class Rml {
public:
    const std::vector<RmlEntry>& entries() const { return entries_; }
    const Signature& signature() const { return signature_; }
    const RmlEntry* find(const Uuid& uuid) const;

private:
    friend Rml load_rml(std::span<const std::uint8_t>, const PublicKey&);
    std::vector<RmlEntry> entries_;
    Signature signature_{};
};

/// "PDRL" file: magic + version + canonical entries + signature over
/// everything before the signature. Throws DuplicateUuid.
std::vector<std::uint8_t> build_signed_rml(const std::vector<RmlEntry>& entries,
                                           const KeyPair& sk_rml);

/// Throws DecodeError or SignatureInvalid; on success the RML is trusted.
Rml load_rml(std::span<const std::uint8_t> file, const PublicKey& pk_rml);

enum class AppraisalOutcome : std::uint8_t {
    Trusted = 0,
    UntrustedHashMismatch = 1,
    UntrustedRollback = 2,
    UnknownComponent = 3,
};

const char* appraisal_outcome_name(AppraisalOutcome o);

/// Rollback is diagnosed before hash mismatch: a downgraded-but-intact
/// binary reports as rollback.
AppraisalOutcome appraise(const Rml& rml, const Uuid& uuid,
                          const Digest& measured, std::uint32_t version);

} // namespace pdrima::appraise
