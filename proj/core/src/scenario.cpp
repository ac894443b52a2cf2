#include "pdrima/scenario.hpp"

namespace pdrima::sim {

namespace {

using attest::Decision;
using attest::FindingCode;
using attest::Verdict;

constexpr std::uint64_t kRmlKeySeed = 9001;
constexpr std::uint64_t kAttestKeySeed = 9002;

Uuid make_uuid(std::uint8_t tag) {
    Uuid u{};
    u.fill(tag);
    return u;
}

const Uuid kKernelUuid = make_uuid(0x00);
const Uuid kPtaUuid = make_uuid(0x11);
const Uuid kTaUuid = make_uuid(0x22);
const Uuid kStrangerUuid = make_uuid(0x33);

struct World {
    KeyPair sk_rml = generate_keypair(KeyRole::Rml, kRmlKeySeed);
    KeyPair sk_attest = generate_keypair(KeyRole::Attest, kAttestKeySeed);
    std::vector<std::uint8_t> policy_blob;
    std::vector<std::uint8_t> rml_file;
    Trace trace;
};

std::vector<measure::Segment> kernel_segments() {
    return {{"text", {0x01, 0x02, 0x03, 0x04, 0x05}},
            {"rodata", {0x10, 0x11, 0x12}},
            {"exc_table", {0x20, 0x21}}};
}

std::vector<measure::Segment> pta_segments() {
    return {{"text", {0x31, 0x32, 0x33}}};
}

std::vector<measure::Segment> ta_segments() {
    return {{"text", {0x41, 0x42, 0x43, 0x44}}, {"data", {0x51}}};
}

std::map<std::string, std::string> ta_properties() {
    return {{"gpd.ta.version", "2"}, {"vendor", "acme"}};
}

Digest golden_for(const Uuid& uuid, measure::ObjectKind kind,
                  std::vector<measure::Segment> segs,
                  std::map<std::string, std::string> props = {}) {
    measure::MeasurableObject obj;
    obj.uuid = uuid;
    obj.kind = kind;
    obj.segments = std::move(segs);
    obj.properties = std::move(props);
    return measure::measure_segments(measure::measured_segments(obj));
}

struct WorldOptions {
    std::uint32_t ta_version = 2;
    std::uint32_t ta_min_version = 2;
    bool ta_in_rml = true;
    std::optional<RemeasureConfig> ta_remeasure;
    bool tail_activity = true; // invocation + syscall after the loads
};

World build_world(const WorldOptions& opt) {
    World w;

    std::vector<policy::PolicyRule> rules = {
        {policy::Action::Appraise, policy::EventType::KernelLoad, {}},
        {policy::Action::Appraise, policy::EventType::StaticComponentLoad, {}},
        {policy::Action::Appraise, policy::EventType::UserTaLoad, {}},
        {policy::Action::Measure, policy::EventType::TaInvocation, {}},
        {policy::Action::Measure, policy::EventType::InterTaCall, {}},
        {policy::Action::Measure, policy::EventType::Syscall, {}},
    };
    w.policy_blob = policy::compile_policy(rules);

    std::vector<appraise::RmlEntry> entries = {
        {kKernelUuid,
         golden_for(kKernelUuid, measure::ObjectKind::Kernel, kernel_segments()),
         1},
        {kPtaUuid,
         golden_for(kPtaUuid, measure::ObjectKind::StaticComponent,
                    pta_segments()),
         1},
    };
    if (opt.ta_in_rml)
        entries.push_back({kTaUuid,
                           golden_for(kTaUuid, measure::ObjectKind::UserTa,
                                      ta_segments(), ta_properties()),
                           opt.ta_min_version});
    w.rml_file = appraise::build_signed_rml(entries, w.sk_rml);

    KernelLoad kernel;
    kernel.uuid = kKernelUuid;
    kernel.segments = kernel_segments();
    w.trace.events.push_back({0, kernel});

    StaticComponentLoad pta;
    pta.uuid = kPtaUuid;
    pta.segments = pta_segments();
    w.trace.events.push_back({5, pta});

    UserTaLoad ta;
    ta.uuid = kTaUuid;
    ta.version = opt.ta_version;
    ta.segments = ta_segments();
    ta.properties = ta_properties();
    ta.remeasure = opt.ta_remeasure;
    w.trace.events.push_back({10, ta});

    if (opt.tail_activity) {
        TaInvocation inv;
        inv.uuid = kTaUuid;
        inv.params = {0xde, 0xad};
        inv.result = 0;
        w.trace.events.push_back({20, inv});

        SyscallEvent sc;
        sc.caller_uuid = kTaUuid;
        sc.number = 7;
        sc.params = {0x01};
        sc.result = 0;
        w.trace.events.push_back({30, sc});
    }
    return w;
}

Verdict validate(const World& w, std::span<const std::uint8_t> ae_bytes,
                 const attest::Quote& quote, const attest::Nonce& expected,
                 attest::NonceCache& cache) {
    auto rml = appraise::load_rml(w.rml_file, w.sk_rml.public_key);
    return attest::ttp_validate(ae_bytes, quote, expected,
                                w.sk_attest.public_key, rml, cache);
}

struct ScenarioBuilder {
    ScenarioResult result;

    void check(const std::string& what, bool ok) {
        result.checks.push_back({what, ok});
    }
    void record(const Verdict& v) { result.verdicts.push_back(v); }

    ScenarioResult finish() {
        result.passed = !result.checks.empty();
        for (const auto& c : result.checks)
            if (!c.passed) result.passed = false;
        return std::move(result);
    }
};

ScenarioResult scenario_clean() {
    ScenarioBuilder b;
    World w = build_world({});
    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);
    auto v = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(v);
    b.check("verdict is trusted", v.decision == Decision::Trusted);
    b.check("no findings", v.findings.empty());
    b.check("no failures on device", dev.report.appraisal_failures.empty() &&
                                         dev.report.remeasure_failures.empty());
    return b.finish();
}

ScenarioResult scenario_tamper_ta() {
    ScenarioBuilder b;
    WorldOptions opt;
    World w = build_world(opt);
    // Flip one byte of the TA image before it is loaded.
    w.trace.attacks.push_back(TamperSegment{kTaUuid, "text", 1, 0x80, 0});

    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;
    b.check("device logged the appraisal failure",
            !dev.report.appraisal_failures.empty());

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);
    auto v = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(v);
    b.check("verdict is untrusted", v.decision == Decision::Untrusted);
    b.check("golden mismatch reported", v.has(FindingCode::GoldenMismatch));
    return b.finish();
}

ScenarioResult scenario_rollback() {
    ScenarioBuilder b;
    WorldOptions opt;
    opt.ta_min_version = 2;
    World w = build_world(opt);
    w.trace.attacks.push_back(DowngradeVersion{kTaUuid, 1});

    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);
    auto v = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(v);
    b.check("verdict is untrusted", v.decision == Decision::Untrusted);
    b.check("rollback reported", v.has(FindingCode::Rollback));
    return b.finish();
}

ScenarioResult scenario_log_mutation() {
    ScenarioBuilder b;
    World w = build_world({});
    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;

    // Variant 1: mutation after signing. The quote covers the bytes, so
    // the seal breaks first.
    {
        attest::NonceCache cache;
        auto ch = attest::Challenge::fresh();
        auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);
        auto mutated = resp.evidence_bytes;
        mutated[mutated.size() / 2] ^= 0x01;
        auto v = validate(w, mutated, resp.quote, ch.nonce, cache);
        b.record(v);
        b.check("post-sign mutation: invalid", v.decision == Decision::Invalid);
        b.check("post-sign mutation: quote invalid",
                v.has(FindingCode::QuoteInvalid));
    }

    // Variant 2: mutation before signing. The quote is honest over a
    // broken chain.
    {
        attest::NonceCache cache;
        auto ch = attest::Challenge::fresh();
        attest::AttestationEvidence ae;
        ae.nonce = ch.nonce;
        ae.vpcr_snapshot = dev.bank.registers();
        ae.sml_entries = dev.sml.entries();
        ae.sml_entries[1].event_data[0] ^= 0x01; // corrupt one logged record
        auto bytes = attest::encode_evidence(ae);
        auto quote = attest::make_quote(w.sk_attest, bytes);
        auto v = validate(w, bytes, quote, ch.nonce, cache);
        b.record(v);
        b.check("pre-sign mutation: untrusted", v.decision == Decision::Untrusted);
        b.check("pre-sign mutation: chain broken",
                v.has(FindingCode::ChainBroken));
    }

    // Variant 3: forged vPCR snapshot over an intact chain.
    {
        attest::NonceCache cache;
        auto ch = attest::Challenge::fresh();
        attest::AttestationEvidence ae;
        ae.nonce = ch.nonce;
        ae.vpcr_snapshot = dev.bank.registers();
        ae.vpcr_snapshot[0].bytes[0] ^= 0x01;
        ae.sml_entries = dev.sml.entries();
        auto bytes = attest::encode_evidence(ae);
        auto quote = attest::make_quote(w.sk_attest, bytes);
        auto v = validate(w, bytes, quote, ch.nonce, cache);
        b.record(v);
        b.check("forged snapshot: untrusted", v.decision == Decision::Untrusted);
        b.check("forged snapshot: vPCR mismatch",
                v.has(FindingCode::VpcrMismatch));
    }
    return b.finish();
}

ScenarioResult scenario_nonce_replay() {
    ScenarioBuilder b;
    World w = build_world({});
    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);

    auto first = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(first);
    b.check("first submission trusted", first.decision == Decision::Trusted);

    auto replay = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(replay);
    b.check("replay is invalid", replay.decision == Decision::Invalid);
    b.check("replay reported", replay.has(FindingCode::NonceReplayed));

    // Evidence bound to a different challenge must not validate either.
    auto other = attest::Challenge::fresh();
    attest::NonceCache cache2;
    auto mismatch =
        validate(w, resp.evidence_bytes, resp.quote, other.nonce, cache2);
    b.record(mismatch);
    b.check("wrong challenge is invalid", mismatch.decision == Decision::Invalid);
    b.check("nonce mismatch reported", mismatch.has(FindingCode::NonceMismatch));
    return b.finish();
}

ScenarioResult scenario_forged_quote() {
    ScenarioBuilder b;
    World w = build_world({});
    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    KeyPair wrong = generate_keypair(KeyRole::Attest, 31337);
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, wrong);
    auto v = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(v);
    b.check("verdict is invalid", v.decision == Decision::Invalid);
    b.check("quote invalid reported", v.has(FindingCode::QuoteInvalid));
    return b.finish();
}

ScenarioResult scenario_unknown_component() {
    ScenarioBuilder b;
    WorldOptions opt;
    World w = build_world(opt);
    // A second TA the TTP has no reference for.
    UserTaLoad stranger;
    stranger.uuid = kStrangerUuid;
    stranger.version = 1;
    stranger.segments = {{"text", {0x77}}};
    w.trace.events.push_back({40, stranger});

    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);
    auto v = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(v);
    b.check("verdict is untrusted", v.decision == Decision::Untrusted);
    b.check("unknown component reported", v.has(FindingCode::UnknownComponent));
    return b.finish();
}

ScenarioResult scenario_remeasure_block() {
    ScenarioBuilder b;
    WorldOptions opt;
    opt.tail_activity = false;
    opt.ta_remeasure = RemeasureConfig{15, measure::FailureResponse::Block};
    World w = build_world(opt);

    // Corrupt the TA in memory after its baseline, then invoke it once
    // the re-measurement is due (load at 10, interval 15, due after 25).
    w.trace.attacks.push_back(TamperSegment{kTaUuid, "text", 0, 0x40, 20});
    TaInvocation inv;
    inv.uuid = kTaUuid;
    inv.params = {0x01};
    w.trace.events.push_back({30, inv});

    auto dev = run_device(w.trace, w.policy_blob, w.rml_file, w.sk_rml.public_key);
    b.result.report = dev.report;
    b.check("call was blocked", !dev.report.blocked_calls.empty());
    b.check("re-measurement failure recorded",
            !dev.report.remeasure_failures.empty());

    bool failure_entry = false;
    for (const auto& e : dev.sml.entries()) {
        if (e.header.event_type != policy::EventType::ReMeasurement) continue;
        auto ed = sml::decode_event_data(e.event_data);
        auto& r = std::get<sml::RemeasureEventData>(ed);
        if (r.outcome == sml::RemeasureLogOutcome::FailedBlock)
            failure_entry = true;
    }
    b.check("failure entry present in SML", failure_entry);

    attest::NonceCache cache;
    auto ch = attest::Challenge::fresh();
    auto resp = attest::device_respond(ch, dev.sml, dev.bank, w.sk_attest);
    auto v = validate(w, resp.evidence_bytes, resp.quote, ch.nonce, cache);
    b.record(v);
    b.check("verdict is untrusted", v.decision == Decision::Untrusted);
    b.check("logged failure surfaced",
            v.has(FindingCode::AppraisalFailureLogged));
    return b.finish();
}

} // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "clean",        "tamper_ta",    "rollback",
        "log_mutation", "nonce_replay", "forged_quote",
        "unknown_component", "remeasure_block"};
    return names;
}

ScenarioResult run_scenario(const std::string& name) {
    ScenarioResult r;
    if (name == "clean") r = scenario_clean();
    else if (name == "tamper_ta") r = scenario_tamper_ta();
    else if (name == "rollback") r = scenario_rollback();
    else if (name == "log_mutation") r = scenario_log_mutation();
    else if (name == "nonce_replay") r = scenario_nonce_replay();
    else if (name == "forged_quote") r = scenario_forged_quote();
    else if (name == "unknown_component") r = scenario_unknown_component();
    else if (name == "remeasure_block") r = scenario_remeasure_block();
    else throw UnknownScenario("no scenario named " + name);
    r.name = name;
    return r;
}

} // namespace pdrima::sim
