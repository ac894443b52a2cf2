#include "pdrima/attest.hpp"

#include <algorithm>

#include "pdrima/codec.hpp"

namespace pdrima::attest {

std::vector<std::uint8_t> encode_evidence(const AttestationEvidence& ae) {
    Encoder e;
    e.raw(ae.nonce);
    for (const auto& r : ae.vpcr_snapshot) e.digest(r);
    e.raw(sml::encode_entry_list(ae.sml_entries));
    return e.take();
}

AttestationEvidence decode_evidence(std::span<const std::uint8_t> bytes) {
    Decoder d(bytes);
    AttestationEvidence ae;
    auto n = d.raw(32);
    std::copy(n.begin(), n.end(), ae.nonce.begin());
    for (auto& r : ae.vpcr_snapshot) r = d.digest();
    ae.sml_entries = sml::decode_entry_list(d);
    d.finish();
    return ae;
}

Quote make_quote(const KeyPair& sk_attest, std::span<const std::uint8_t> ae_bytes) {
    Digest ae_digest = hash(ae_bytes);
    return Quote{sign(sk_attest, ae_digest.bytes)};
}

DeviceResponse device_respond(const Challenge& challenge, const sml::Sml& sml,
                              const sml::VpcrBank& bank, const KeyPair& sk_attest) {
    DeviceResponse resp;
    resp.evidence.nonce = challenge.nonce;
    resp.evidence.vpcr_snapshot = bank.registers();
    resp.evidence.sml_entries = sml.entries();
    resp.evidence_bytes = encode_evidence(resp.evidence);
    resp.quote = make_quote(sk_attest, resp.evidence_bytes);
    return resp;
}

const char* finding_code_name(FindingCode c) {
    switch (c) {
    case FindingCode::QuoteInvalid: return "quote_invalid";
    case FindingCode::NonceMismatch: return "nonce_mismatch";
    case FindingCode::NonceReplayed: return "nonce_replayed";
    case FindingCode::ChainBroken: return "chain_broken";
    case FindingCode::VpcrMismatch: return "vpcr_mismatch";
    case FindingCode::GoldenMismatch: return "golden_mismatch";
    case FindingCode::Rollback: return "rollback";
    case FindingCode::UnknownComponent: return "unknown_component";
    case FindingCode::AppraisalFailureLogged: return "appraisal_failure_logged";
    }
    return "unknown";
}

const char* decision_name(Decision d) {
    switch (d) {
    case Decision::Trusted: return "trusted";
    case Decision::Untrusted: return "untrusted";
    case Decision::Invalid: return "invalid";
    }
    return "unknown";
}

Verdict ttp_validate(std::span<const std::uint8_t> ae_bytes, const Quote& quote,
                     const Nonce& expected_nonce, const PublicKey& pk_attest,
                     const appraise::Rml& rml, NonceCache& nonce_cache) {
    Verdict v;

    Digest ae_digest = hash(ae_bytes);
    if (!verify(pk_attest, ae_digest.bytes, quote.signature)) {
        v.decision = Decision::Invalid;
        v.findings.push_back({FindingCode::QuoteInvalid,
                              "quote signature does not verify under PK_Attest"});
        return v;
    }

    AttestationEvidence ae;
    try {
        ae = decode_evidence(ae_bytes);
    } catch (const DecodeError& e) {
        v.decision = Decision::Invalid;
        v.findings.push_back({FindingCode::QuoteInvalid,
                              std::string("evidence undecodable: ") + e.what()});
        return v;
    }

    if (ae.nonce != expected_nonce) {
        v.decision = Decision::Invalid;
        v.findings.push_back({FindingCode::NonceMismatch,
                              "evidence nonce does not match the challenge"});
        return v;
    }
    if (!nonce_cache.insert(ae.nonce).second) {
        v.decision = Decision::Invalid;
        v.findings.push_back({FindingCode::NonceReplayed,
                              "nonce already consumed by a previous validation"});
        return v;
    }

    if (auto broken = sml::verify_chain(ae.sml_entries)) {
        v.decision = Decision::Untrusted;
        v.findings.push_back(
            {FindingCode::ChainBroken,
             "SML chain broken at entry " + std::to_string(broken->index)});
        return v;
    }

    auto replayed = sml::replay_vpcrs(ae.sml_entries);
    if (replayed != ae.vpcr_snapshot) {
        v.findings.push_back({FindingCode::VpcrMismatch,
                              "replayed vPCRs differ from quoted snapshot"});
    }

    for (std::size_t i = 0; i < ae.sml_entries.size(); ++i) {
        const auto& entry = ae.sml_entries[i];
        sml::EventData ed;
        try {
            ed = sml::decode_event_data(entry.event_data);
        } catch (const DecodeError&) {
            v.findings.push_back({FindingCode::ChainBroken,
                                  "undecodable event data at entry " +
                                      std::to_string(i)});
            continue;
        }

        if (auto* s = std::get_if<sml::StaticEventData>(&ed)) {
            auto outcome = appraise::appraise(rml, s->uuid, entry.result, s->version);
            switch (outcome) {
            case appraise::AppraisalOutcome::Trusted:
                break;
            case appraise::AppraisalOutcome::UntrustedHashMismatch:
                v.findings.push_back({FindingCode::GoldenMismatch, to_hex(s->uuid)});
                break;
            case appraise::AppraisalOutcome::UntrustedRollback:
                v.findings.push_back({FindingCode::Rollback, to_hex(s->uuid)});
                break;
            case appraise::AppraisalOutcome::UnknownComponent:
                v.findings.push_back({FindingCode::UnknownComponent, to_hex(s->uuid)});
                break;
            }
            if (s->appraisal != sml::LoggedAppraisal::NotAppraised &&
                s->appraisal != sml::LoggedAppraisal::Trusted) {
                v.findings.push_back(
                    {FindingCode::AppraisalFailureLogged, to_hex(s->uuid)});
            }
        } else if (auto* r = std::get_if<sml::RemeasureEventData>(&ed)) {
            if (r->outcome != sml::RemeasureLogOutcome::Passed)
                v.findings.push_back(
                    {FindingCode::AppraisalFailureLogged, to_hex(r->uuid)});
        }
    }

    v.decision = v.findings.empty() ? Decision::Trusted : Decision::Untrusted;
    return v;
}

} // namespace pdrima::attest
