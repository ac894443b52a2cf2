#include "pdrima/appraise.hpp"

#include <algorithm>
#include <cstring>
#include <set>

#include "pdrima/codec.hpp"

namespace pdrima::appraise {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'D', 'R', 'L'};
constexpr std::uint8_t kVersion = 0x01;

void encode_entries(Encoder& e, const std::vector<RmlEntry>& entries) {
    e.u32(std::uint32_t(entries.size()));
    for (const auto& re : entries) {
        e.uuid(re.uuid);
        e.digest(re.golden_hash);
        e.u32(re.min_version);
    }
}

} // namespace

const RmlEntry* Rml::find(const Uuid& uuid) const {
    for (const auto& re : entries_)
        if (re.uuid == uuid) return &re;
    return nullptr;
}

std::vector<std::uint8_t> build_signed_rml(const std::vector<RmlEntry>& entries,
                                           const KeyPair& sk_rml) {
    std::set<Uuid> seen;
    for (const auto& re : entries)
        if (!seen.insert(re.uuid).second)
            throw DuplicateUuid("duplicate uuid in RML: " + to_hex(re.uuid));

    Encoder e;
    e.raw(kMagic);
    e.u8(kVersion);
    encode_entries(e, entries);

    Signature sig = sign(sk_rml, e.out());
    e.raw(sig);
    return e.take();
}

Rml load_rml(std::span<const std::uint8_t> file, const PublicKey& pk_rml) {
    if (file.size() < 64) throw DecodeError("RML file too short");
    auto signed_region = file.first(file.size() - 64);
    Signature sig;
    std::memcpy(sig.data(), file.data() + file.size() - 64, 64);

    if (!verify(pk_rml, signed_region, sig))
        throw SignatureInvalid("RML signature check failed");

    Decoder d(signed_region);
    auto magic = d.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic))
        throw DecodeError("bad RML magic");
    if (d.u8() != kVersion) throw DecodeError("unsupported RML version");

    Rml rml;
    rml.signature_ = sig;
    std::uint32_t count = d.u32();
    rml.entries_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        RmlEntry re;
        re.uuid = d.uuid();
        re.golden_hash = d.digest();
        re.min_version = d.u32();
        rml.entries_.push_back(re);
    }
    d.finish();
    return rml;
}

const char* appraisal_outcome_name(AppraisalOutcome o) {
    switch (o) {
    case AppraisalOutcome::Trusted: return "trusted";
    case AppraisalOutcome::UntrustedHashMismatch: return "untrusted_hash_mismatch";
    case AppraisalOutcome::UntrustedRollback: return "untrusted_rollback";
    case AppraisalOutcome::UnknownComponent: return "unknown_component";
    }
    return "unknown";
}

AppraisalOutcome appraise(const Rml& rml, const Uuid& uuid,
                          const Digest& measured, std::uint32_t version) {
    const RmlEntry* re = rml.find(uuid);
    if (!re) return AppraisalOutcome::UnknownComponent;
    if (version < re->min_version) return AppraisalOutcome::UntrustedRollback;
    if (measured != re->golden_hash) return AppraisalOutcome::UntrustedHashMismatch;
    return AppraisalOutcome::Trusted;
}

} // namespace pdrima::appraise
