// pdrima: single multi-role entry point for the TTP, device, verifier and
// simulation workflows.
//
// Exit codes: 0 success / trusted verdict, 1 untrusted, 2 invalid evidence,
// 3 usage or I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "pdrima/appraise.hpp"
#include "pdrima/attest.hpp"
#include "pdrima/codec.hpp"
#include "pdrima/policy.hpp"
#include "pdrima/scenario.hpp"
#include "pdrima/sim.hpp"
#include "pdrima/sml.hpp"
#include "pdrima/wire.hpp"

namespace {

using nlohmann::json;
using namespace pdrima;

constexpr int kExitOk = 0;
constexpr int kExitUntrusted = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitUsage = 3;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f),
                                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size()));
}

PublicKey read_public_key(const std::string& path) {
    auto data = read_file(path);
    if (data.size() != 32)
        throw std::runtime_error(path + ": expected a 32-byte public key");
    PublicKey pk;
    std::copy(data.begin(), data.end(), pk.begin());
    return pk;
}

KeyPair read_secret_key(const std::string& path, KeyRole role) {
    auto data = read_file(path);
    if (data.size() != 64)
        throw std::runtime_error(path + ": expected a 64-byte secret key");
    KeyPair kp;
    kp.role = role;
    kp.secret = std::move(data);
    // Ed25519 secret keys embed the public half.
    std::copy(kp.secret.begin() + 32, kp.secret.end(), kp.public_key.begin());
    return kp;
}

std::vector<policy::PolicyRule> parse_rules_json(const std::string& path) {
    json doc = json::parse(read_file(path));
    std::vector<policy::PolicyRule> rules;
    for (const auto& jr : doc) {
        policy::PolicyRule r;
        std::string action = jr.at("action").get<std::string>();
        if (action == "measure") r.action = policy::Action::Measure;
        else if (action == "appraise") r.action = policy::Action::Appraise;
        else throw std::runtime_error("unknown action: " + action);

        std::string event = jr.at("event").get<std::string>();
        bool found = false;
        for (std::uint8_t c = 0; c <= 6; ++c) {
            if (event == policy::event_type_name(policy::EventType(c))) {
                r.event = policy::EventType(c);
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("unknown event: " + event);

        if (jr.contains("conditions")) {
            for (const auto& jc : jr["conditions"]) {
                std::string kind = jc.at("kind").get<std::string>();
                if (kind == "uuid_equals")
                    r.conditions.push_back(policy::UuidEquals{
                        uuid_from_hex(jc.at("uuid").get<std::string>())});
                else if (kind == "syscall_number_equals")
                    r.conditions.push_back(policy::SyscallNumberEquals{
                        jc.at("number").get<std::uint32_t>()});
                else if (kind == "caller_uuid_equals")
                    r.conditions.push_back(policy::CallerUuidEquals{
                        uuid_from_hex(jc.at("uuid").get<std::string>())});
                else if (kind == "min_size_bytes")
                    r.conditions.push_back(policy::MinSizeBytes{
                        jc.at("bytes").get<std::uint64_t>()});
                else
                    throw std::runtime_error("unknown condition kind: " + kind);
            }
        }
        rules.push_back(std::move(r));
    }
    return rules;
}

std::vector<appraise::RmlEntry> parse_rml_json(const std::string& path) {
    json doc = json::parse(read_file(path));
    std::vector<appraise::RmlEntry> entries;
    for (const auto& je : doc) {
        appraise::RmlEntry e;
        e.uuid = uuid_from_hex(je.at("uuid").get<std::string>());
        e.golden_hash = digest_from_hex(je.at("golden_hash").get<std::string>());
        e.min_version = je.value("min_version", 0u);
        entries.push_back(e);
    }
    return entries;
}

json verdict_to_json(const attest::Verdict& v) {
    json findings = json::array();
    for (const auto& f : v.findings)
        findings.push_back({{"code", attest::finding_code_name(f.code)},
                            {"detail", f.detail}});
    return {{"decision", attest::decision_name(v.decision)},
            {"findings", findings}};
}

int verdict_exit_code(const attest::Verdict& v) {
    switch (v.decision) {
    case attest::Decision::Trusted: return kExitOk;
    case attest::Decision::Untrusted: return kExitUntrusted;
    case attest::Decision::Invalid: return kExitInvalid;
    }
    return kExitUsage;
}

void print_verdict(const attest::Verdict& v, bool as_json) {
    if (as_json) {
        std::cout << verdict_to_json(v).dump(2) << "\n";
        return;
    }
    std::cout << "verdict: " << attest::decision_name(v.decision) << "\n";
    for (const auto& f : v.findings)
        std::cout << "  finding: " << attest::finding_code_name(f.code) << " ("
                  << f.detail << ")\n";
}

json report_to_json(const sim::SimReport& r) {
    json vpcrs = json::array();
    for (const auto& d : r.final_vpcrs) vpcrs.push_back(to_hex(d));
    return {{"events_processed", r.events_processed},
            {"entries_appended", r.entries_appended},
            {"appraisal_failures", r.appraisal_failures},
            {"remeasure_failures", r.remeasure_failures},
            {"blocked_calls", r.blocked_calls},
            {"final_vpcrs", vpcrs}};
}

void print_report(const sim::SimReport& r, bool as_json) {
    if (as_json) {
        std::cout << report_to_json(r).dump(2) << "\n";
        return;
    }
    std::cout << "events processed:  " << r.events_processed << "\n"
              << "entries appended:  " << r.entries_appended << "\n";
    for (const auto& s : r.appraisal_failures)
        std::cout << "appraisal failure: " << s << "\n";
    for (const auto& s : r.remeasure_failures)
        std::cout << "remeasure failure: " << s << "\n";
    for (const auto& s : r.blocked_calls)
        std::cout << "blocked call:      " << s << "\n";
    for (int i = 0; i < 4; ++i)
        std::cout << "vPCR[" << i << "]: " << to_hex(r.final_vpcrs[i]) << "\n";
}

std::uint16_t parse_listen(const std::string& spec) {
    auto pos = spec.rfind(':');
    std::string port = pos == std::string::npos ? spec : spec.substr(pos + 1);
    int p = std::stoi(port);
    if (p < 0 || p > 65535) throw std::runtime_error("bad port: " + port);
    return std::uint16_t(p);
}

struct Target {
    std::string host;
    std::uint16_t port;
};

Target parse_target(const std::string& spec) {
    auto pos = spec.rfind(':');
    if (pos == std::string::npos)
        return {spec, wire::kDefaultPort};
    return {spec.substr(0, pos), std::uint16_t(std::stoi(spec.substr(pos + 1)))};
}

int cmd_inspect(const std::string& path, const std::string& pk_rml_path) {
    auto data = read_file(path);
    if (data.size() >= 4) {
        std::string magic(data.begin(), data.begin() + 4);
        if (magic == "PDPL") {
            auto set = policy::load_policy(data);
            std::cout << "policy blob: " << set.rules.size() << " rules\n"
                      << "blob digest: " << to_hex(set.blob_digest) << "\n";
            std::size_t i = 0;
            for (const auto& r : set.rules)
                std::cout << "  rule " << i++ << ": "
                          << (r.action == policy::Action::Appraise ? "appraise"
                                                                   : "measure")
                          << " " << policy::event_type_name(r.event) << " ("
                          << r.conditions.size() << " conditions)\n";
            return kExitOk;
        }
        if (magic == "PDRL") {
            if (pk_rml_path.empty()) {
                std::cerr << "RML inspection needs --pk-rml\n";
                return kExitUsage;
            }
            auto rml = appraise::load_rml(data, read_public_key(pk_rml_path));
            std::cout << "RML: " << rml.entries().size()
                      << " entries, signature OK\n";
            for (const auto& e : rml.entries())
                std::cout << "  " << to_hex(e.uuid)
                          << " golden=" << to_hex(e.golden_hash)
                          << " min_version=" << e.min_version << "\n";
            return kExitOk;
        }
        if (magic == "PDSM") {
            auto f = sml::parse_sml(data);
            std::cout << "SML dump: " << f.entries.size() << " entries, head "
                      << to_hex(f.head_digest) << "\n";
            std::size_t i = 0;
            for (const auto& e : f.entries)
                std::cout << "  entry " << i++ << ": vPCR["
                          << int(e.header.vpcr_index) << "] "
                          << policy::event_type_name(e.header.event_type)
                          << " result=" << to_hex(e.result) << "\n";
            if (auto broken = sml::verify_chain(f.entries)) {
                std::cout << "chain: BrokenAt " << broken->index << "\n";
                return kExitUntrusted;
            }
            std::cout << "chain: OK\n";
            return kExitOk;
        }
    }
    // Fall through to the trace format.
    auto trace = sim::load_trace(path);
    std::cout << "trace: " << trace.events.size() << " events, "
              << trace.attacks.size() << " attack injections\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PDRIMA runtime-integrity simulator and attestation tools"};
    app.require_subcommand(1);

    // ttp
    auto* ttp = app.add_subcommand("ttp", "Enrollment authority operations");
    ttp->require_subcommand(1);

    auto* keygen = ttp->add_subcommand("keygen", "Generate a role key pair");
    std::string kg_role = "attest", kg_out = ".";
    std::optional<std::uint64_t> kg_seed;
    keygen->add_option("--role", kg_role,
                       "attest|rml|ttp|verifier|device")->capture_default_str();
    keygen->add_option("--seed", kg_seed,
                       "Deterministic seed (tests only; never for deployment)");
    keygen->add_option("-o,--out-dir", kg_out, "Output directory");

    auto* compile = ttp->add_subcommand("compile-policy", "Compile rules JSON");
    std::string cp_rules, cp_out = "policy.blob";
    compile->add_option("rules", cp_rules, "Rules JSON file")->required();
    compile->add_option("-o,--output", cp_out, "Output blob path");

    auto* sign_rml = ttp->add_subcommand("sign-rml", "Build and sign an RML");
    std::string sr_entries, sr_key, sr_out = "rml.bin";
    sign_rml->add_option("entries", sr_entries, "Entries JSON file")->required();
    sign_rml->add_option("--key", sr_key, "RML secret key file")->required();
    sign_rml->add_option("-o,--output", sr_out, "Output RML path");

    // device
    auto* device = app.add_subcommand("device", "Simulated device operations");
    device->require_subcommand(1);
    std::string dv_trace, dv_policy, dv_rml, dv_pk_rml;
    std::string dv_dump, dv_listen = ":7730", dv_attest_sk;
    std::size_t dv_sessions = 0;
    bool dv_json = false;

    auto add_device_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--trace", dv_trace, "Event trace (.jsonl)")->required();
        cmd->add_option("--policy", dv_policy, "Compiled policy blob")->required();
        cmd->add_option("--rml", dv_rml, "Signed RML file")->required();
        cmd->add_option("--pk-rml", dv_pk_rml, "RML public key")->required();
    };

    auto* run = device->add_subcommand("run", "Replay a trace and report");
    add_device_inputs(run);
    run->add_option("--dump-sml", dv_dump, "Also write the SML dump here");
    run->add_flag("--json", dv_json, "Machine-readable report");

    auto* dump = device->add_subcommand("dump-sml", "Replay a trace, dump the SML");
    add_device_inputs(dump);
    std::string dd_out = "sml.bin";
    dump->add_option("-o,--output", dd_out, "SML dump path");

    auto* serve = device->add_subcommand("serve",
                                         "Replay a trace, answer challenges");
    add_device_inputs(serve);
    serve->add_option("--attest-sk", dv_attest_sk, "Attestation secret key")
        ->required();
    serve->add_option("--listen", dv_listen, "Listen address (:port)");
    serve->add_option("--sessions", dv_sessions,
                      "Stop after N sessions (0 = run forever)");

    // verifier
    auto* verifier = app.add_subcommand("verifier", "Remote challenger");
    verifier->require_subcommand(1);
    auto* challenge = verifier->add_subcommand("challenge",
                                               "Attest a running device");
    std::string vc_target, vc_rml, vc_pk_attest, vc_pk_rml;
    int vc_timeout = 5000;
    bool vc_json = false;
    challenge->add_option("--target", vc_target, "host:port")->required();
    challenge->add_option("--rml", vc_rml, "Signed RML (for the TTP role)")
        ->required();
    challenge->add_option("--pk-attest", vc_pk_attest, "Device attestation PK")
        ->required();
    challenge->add_option("--pk-rml", vc_pk_rml, "RML public key")->required();
    challenge->add_option("--timeout", vc_timeout, "Timeout in ms");
    challenge->add_flag("--json", vc_json, "Machine-readable verdict");

    // sim
    auto* simcmd = app.add_subcommand("sim", "Built-in attack scenarios");
    simcmd->require_subcommand(1);
    auto* scen = simcmd->add_subcommand("scenario", "Run one registry scenario");
    std::string sc_name;
    bool sc_json = false;
    scen->add_option("name", sc_name, "Scenario name, or 'list'")->required();
    scen->add_flag("--json", sc_json, "Machine-readable result");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Render a PDRIMA file");
    std::string in_file, in_pk_rml;
    inspect->add_option("file", in_file, "policy blob, RML, SML dump or trace")
        ->required();
    inspect->add_option("--pk-rml", in_pk_rml, "RML public key (for RML files)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (keygen->parsed()) {
            KeyRole role;
            if (kg_role == "attest") role = KeyRole::Attest;
            else if (kg_role == "rml") role = KeyRole::Rml;
            else if (kg_role == "ttp") role = KeyRole::Ttp;
            else if (kg_role == "verifier") role = KeyRole::Verifier;
            else if (kg_role == "device") role = KeyRole::Device;
            else throw std::runtime_error("unknown role: " + kg_role);

            KeyPair kp = kg_seed ? generate_keypair(role, *kg_seed)
                                 : generate_keypair(role);
            std::string base = kg_out + "/" + kg_role;
            write_file(base + ".pk", kp.public_key);
            write_file(base + ".sk", kp.secret);
            std::cout << "wrote " << base << ".pk and " << base << ".sk\n";
            return kExitOk;
        }
        if (compile->parsed()) {
            auto blob = policy::compile_policy(parse_rules_json(cp_rules));
            write_file(cp_out, blob);
            std::cout << "wrote " << cp_out << " (" << blob.size() << " bytes)\n";
            return kExitOk;
        }
        if (sign_rml->parsed()) {
            auto file = appraise::build_signed_rml(
                parse_rml_json(sr_entries), read_secret_key(sr_key, KeyRole::Rml));
            write_file(sr_out, file);
            std::cout << "wrote " << sr_out << " (" << file.size() << " bytes)\n";
            return kExitOk;
        }
        if (run->parsed() || dump->parsed() || serve->parsed()) {
            auto trace = sim::load_trace(dv_trace);
            auto result = sim::run_device(trace, read_file(dv_policy),
                                          read_file(dv_rml),
                                          read_public_key(dv_pk_rml));
            if (dump->parsed()) {
                write_file(dd_out, sml::serialize_sml(result.sml));
                std::cout << "wrote " << dd_out << "\n";
                return kExitOk;
            }
            if (run->parsed()) {
                if (!dv_dump.empty())
                    write_file(dv_dump, sml::serialize_sml(result.sml));
                print_report(result.report, dv_json);
                return kExitOk;
            }
            // serve
            auto sk_attest = read_secret_key(dv_attest_sk, KeyRole::Attest);
            wire::AttestationServer server(
                parse_listen(dv_listen), [&](const attest::Challenge& ch) {
                    return attest::device_respond(ch, result.sml, result.bank,
                                                  sk_attest);
                });
            std::cout << "listening on port " << server.port() << "\n";
            server.serve(dv_sessions);
            return kExitOk;
        }
        if (challenge->parsed()) {
            auto target = parse_target(vc_target);
            auto exchange =
                wire::challenge_device(target.host, target.port, vc_timeout);
            // The verifier holds no references; the TTP role validates.
            auto rml = appraise::load_rml(read_file(vc_rml),
                                          read_public_key(vc_pk_rml));
            attest::NonceCache cache;
            auto verdict = attest::ttp_validate(
                exchange.response.evidence_bytes, exchange.response.quote,
                exchange.nonce, read_public_key(vc_pk_attest), rml, cache);
            print_verdict(verdict, vc_json);
            return verdict_exit_code(verdict);
        }
        if (scen->parsed()) {
            if (sc_name == "list") {
                for (const auto& n : sim::scenario_names()) std::cout << n << "\n";
                return kExitOk;
            }
            auto result = sim::run_scenario(sc_name);
            if (sc_json) {
                json checks = json::array();
                for (const auto& c : result.checks)
                    checks.push_back(
                        {{"check", c.description}, {"passed", c.passed}});
                json verdicts = json::array();
                for (const auto& v : result.verdicts)
                    verdicts.push_back(verdict_to_json(v));
                std::cout << json{{"scenario", result.name},
                                  {"passed", result.passed},
                                  {"checks", checks},
                                  {"verdicts", verdicts},
                                  {"report", report_to_json(result.report)}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << "scenario " << result.name << ": "
                          << (result.passed ? "PASS" : "FAIL") << "\n";
                for (const auto& c : result.checks)
                    std::cout << "  [" << (c.passed ? "ok" : "FAIL") << "] "
                              << c.description << "\n";
            }
            return result.passed ? kExitOk : kExitUntrusted;
        }
        if (inspect->parsed()) return cmd_inspect(in_file, in_pk_rml);
    } catch (const wire::Timeout& e) {
        std::cerr << "timeout: " << e.what() << "\n";
        return kExitUsage;
    } catch (const wire::MalformedResponse& e) {
        std::cerr << "malformed response: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
