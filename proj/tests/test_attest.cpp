#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "oracle.hpp"
#include "pdrima/attest.hpp"
#include "pdrima/wire.hpp"

using namespace pdrima;
using namespace pdrima::attest;

namespace {

struct Fixture {
    KeyPair attest_key = generate_keypair(KeyRole::Attest, 2001);
    KeyPair rml_key = generate_keypair(KeyRole::Rml, 2002);
    measure::MeasurableObject ta;
    appraise::Rml rml;
    sml::Sml log{64};
    sml::VpcrBank bank;

    Fixture() {
        ta.uuid.fill(0x42);
        ta.kind = measure::ObjectKind::UserTa;
        ta.version = 3;
        ta.segments = {{"text", {1, 2, 3, 4}}};

        appraise::RmlEntry entry;
        entry.uuid = ta.uuid;
        entry.golden_hash = measure::measure_segments(ta.segments);
        entry.min_version = 2;
        rml = appraise::load_rml(appraise::build_signed_rml({entry}, rml_key),
                                 rml_key.public_key);

        append_ta_load(sml::LoggedAppraisal::Trusted);
    }

    void append_ta_load(sml::LoggedAppraisal appraisal) {
        sml::StaticEventData ed;
        ed.uuid = ta.uuid;
        ed.kind = ta.kind;
        ed.version = ta.version;
        ed.measured = measure::measure_segments(ta.segments);
        ed.appraisal = appraisal;
        log.append(bank, 2, policy::EventType::UserTaLoad,
                   sml::encode_event_data(ed), ed.measured);
    }

    DeviceResponse respond(const Challenge& c) const {
        return device_respond(c, log, bank, attest_key);
    }
};

} // namespace

TEST_CASE("evidence encoding round trips") {
    Fixture fx;
    auto resp = fx.respond(Challenge::fresh());
    auto back = decode_evidence(resp.evidence_bytes);
    CHECK(back.nonce == resp.evidence.nonce);
    CHECK(back.vpcr_snapshot == resp.evidence.vpcr_snapshot);
    CHECK(back.sml_entries == resp.evidence.sml_entries);
}

TEST_CASE("honest exchange is trusted with no findings") {
    Fixture fx;
    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);
    NonceCache cache;
    auto v = ttp_validate(resp.evidence_bytes, resp.quote, c.nonce,
                          fx.attest_key.public_key, fx.rml, cache);
    CHECK(v.decision == Decision::Trusted);
    CHECK(v.findings.empty());
}

TEST_CASE("every single-byte flip of the evidence invalidates the quote") {
    Fixture fx;
    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);

    for (std::size_t i = 0; i < resp.evidence_bytes.size(); ++i) {
        auto bad = resp.evidence_bytes;
        bad[i] ^= 0x01;
        NonceCache cache;
        auto v = ttp_validate(bad, resp.quote, c.nonce,
                              fx.attest_key.public_key, fx.rml, cache);
        CHECK(v.decision == Decision::Invalid);
        CHECK(v.has(FindingCode::QuoteInvalid));
    }
}

TEST_CASE("a quote from the wrong key is invalid") {
    Fixture fx;
    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);
    auto forged = make_quote(generate_keypair(KeyRole::Attest, 9999),
                             resp.evidence_bytes);
    NonceCache cache;
    auto v = ttp_validate(resp.evidence_bytes, forged, c.nonce,
                          fx.attest_key.public_key, fx.rml, cache);
    CHECK(v.decision == Decision::Invalid);
    CHECK(v.has(FindingCode::QuoteInvalid));
}

TEST_CASE("nonce mismatch and replay are both invalid, distinctly") {
    Fixture fx;
    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);
    NonceCache cache;

    // First exchange passes and caches the nonce.
    CHECK(ttp_validate(resp.evidence_bytes, resp.quote, c.nonce,
                       fx.attest_key.public_key, fx.rml, cache)
              .decision == Decision::Trusted);

    // The identical response replayed is rejected.
    auto replay = ttp_validate(resp.evidence_bytes, resp.quote, c.nonce,
                               fx.attest_key.public_key, fx.rml, cache);
    CHECK(replay.decision == Decision::Invalid);
    CHECK(replay.has(FindingCode::NonceReplayed));

    // A response answering some other challenge mismatches.
    Challenge other = Challenge::fresh();
    auto mismatch = ttp_validate(resp.evidence_bytes, resp.quote, other.nonce,
                                 fx.attest_key.public_key, fx.rml, cache);
    CHECK(mismatch.decision == Decision::Invalid);
    CHECK(mismatch.has(FindingCode::NonceMismatch));
}

TEST_CASE("a mutated log with an honest re-quote breaks the chain") {
    Fixture fx;
    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);

    auto ae = resp.evidence;
    ae.sml_entries[0].event_data[0] ^= 0x01;
    auto bytes = encode_evidence(ae);
    auto quote = make_quote(fx.attest_key, bytes);

    NonceCache cache;
    auto v = ttp_validate(bytes, quote, c.nonce, fx.attest_key.public_key,
                          fx.rml, cache);
    CHECK(v.decision == Decision::Untrusted);
    CHECK(v.has(FindingCode::ChainBroken));
}

TEST_CASE("a forged vpcr snapshot over an intact log is caught by replay") {
    Fixture fx;
    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);

    auto ae = resp.evidence;
    ae.vpcr_snapshot[2].bytes[0] ^= 0x01;
    auto bytes = encode_evidence(ae);
    auto quote = make_quote(fx.attest_key, bytes);

    NonceCache cache;
    auto v = ttp_validate(bytes, quote, c.nonce, fx.attest_key.public_key,
                          fx.rml, cache);
    CHECK(v.decision == Decision::Untrusted);
    CHECK(v.has(FindingCode::VpcrMismatch));
}

TEST_CASE("static entries are re-appraised against the reference list") {
    Fixture fx;
    // Append a load of an unknown component and one downgraded version.
    measure::MeasurableObject stranger;
    stranger.uuid.fill(0x77);
    stranger.segments = {{"text", {9}}};
    sml::StaticEventData ed;
    ed.uuid = stranger.uuid;
    ed.kind = measure::ObjectKind::UserTa;
    ed.version = 1;
    ed.measured = measure::measure_segments(stranger.segments);
    fx.log.append(fx.bank, 2, policy::EventType::UserTaLoad,
                  sml::encode_event_data(ed), ed.measured);

    sml::StaticEventData rollback = ed;
    rollback.uuid = fx.ta.uuid;
    rollback.version = 1; // below min_version 2
    rollback.measured = measure::measure_segments(fx.ta.segments);
    fx.log.append(fx.bank, 2, policy::EventType::UserTaLoad,
                  sml::encode_event_data(rollback), rollback.measured);

    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);
    NonceCache cache;
    auto v = ttp_validate(resp.evidence_bytes, resp.quote, c.nonce,
                          fx.attest_key.public_key, fx.rml, cache);
    CHECK(v.decision == Decision::Untrusted);
    CHECK(v.has(FindingCode::UnknownComponent));
    CHECK(v.has(FindingCode::Rollback));
}

TEST_CASE("golden mismatch for a tampered but chained entry") {
    Fixture fx;
    auto tampered = fx.ta;
    tampered.segments[0].data[0] ^= 0xff;
    sml::StaticEventData ed;
    ed.uuid = fx.ta.uuid;
    ed.kind = fx.ta.kind;
    ed.version = fx.ta.version;
    ed.measured = measure::measure_segments(tampered.segments);
    fx.log.append(fx.bank, 2, policy::EventType::UserTaLoad,
                  sml::encode_event_data(ed), ed.measured);

    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);
    NonceCache cache;
    auto v = ttp_validate(resp.evidence_bytes, resp.quote, c.nonce,
                          fx.attest_key.public_key, fx.rml, cache);
    CHECK(v.decision == Decision::Untrusted);
    CHECK(v.has(FindingCode::GoldenMismatch));
}

TEST_CASE("device-logged failures surface in the verdict") {
    Fixture fx;
    sml::RemeasureEventData ed;
    ed.uuid = fx.ta.uuid;
    ed.outcome = sml::RemeasureLogOutcome::FailedBlock;
    ed.measured = oracle::sha256(std::vector<std::uint8_t>{1});
    fx.log.append(fx.bank, 2, policy::EventType::ReMeasurement,
                  sml::encode_event_data(ed), ed.measured);

    Challenge c = Challenge::fresh();
    auto resp = fx.respond(c);
    NonceCache cache;
    auto v = ttp_validate(resp.evidence_bytes, resp.quote, c.nonce,
                          fx.attest_key.public_key, fx.rml, cache);
    CHECK(v.decision == Decision::Untrusted);
    CHECK(v.has(FindingCode::AppraisalFailureLogged));
}

TEST_CASE("frames round trip through encoding") {
    wire::Frame f{wire::MessageType::Challenge, {1, 2, 3}};
    auto bytes = wire::encode_frame(f);
    CHECK(bytes[0] == 'P');
    CHECK(bytes[1] == 'D');
    CHECK(bytes[2] == 'R');
    CHECK(bytes[3] == 'A');
    CHECK(bytes[4] == wire::kProtocolVersion);
    CHECK(bytes[5] == std::uint8_t(wire::MessageType::Challenge));
}

TEST_CASE("response payload codec round trips") {
    Fixture fx;
    auto resp = fx.respond(Challenge::fresh());
    auto payload = wire::encode_response_payload(resp);
    auto back = wire::decode_response_payload(payload);
    CHECK(back.evidence_bytes == resp.evidence_bytes);
    CHECK(back.quote.signature == resp.quote.signature);
}

TEST_CASE("loopback attestation over TCP yields a trusted verdict") {
    Fixture fx;
    wire::AttestationServer server(0, [&](const Challenge& c) {
        return fx.respond(c);
    });
    std::uint16_t port = server.port();
    std::thread t([&] { server.serve(1); });

    auto result = wire::challenge_device("127.0.0.1", port, 2000);
    t.join();

    NonceCache cache;
    auto v = ttp_validate(result.response.evidence_bytes, result.response.quote,
                          result.nonce, fx.attest_key.public_key, fx.rml, cache);
    CHECK(v.decision == Decision::Trusted);
}

TEST_CASE("connecting to a closed port is a transport error") {
    wire::AttestationServer probe(0, [](const Challenge& c) {
        return attest::DeviceResponse{};
    });
    std::uint16_t dead_port = probe.port();
    probe.stop();
    CHECK_THROWS_AS((void)wire::challenge_device("127.0.0.1", dead_port, 500),
                    wire::TransportError);
}
