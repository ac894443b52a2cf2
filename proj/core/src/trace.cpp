#include "pdrima/trace.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pdrima/codec.hpp"

namespace pdrima::sim {

namespace {

using nlohmann::json;

Uuid get_uuid(const json& j, const char* key) {
    return uuid_from_hex(j.at(key).get<std::string>());
}

std::optional<Uuid> get_opt_uuid(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return uuid_from_hex(j[key].get<std::string>());
}

std::vector<std::uint8_t> get_hex_bytes(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    return from_hex(j[key].get<std::string>());
}

std::vector<measure::Segment> get_segments(const json& j) {
    std::vector<measure::Segment> segs;
    for (const auto& s : j.at("segments")) {
        measure::Segment seg;
        seg.label = s.at("label").get<std::string>();
        if (seg.label.empty()) throw std::invalid_argument("empty segment label");
        seg.data = from_hex(s.value("data_hex", std::string{}));
        segs.push_back(std::move(seg));
    }
    return segs;
}

std::optional<RemeasureConfig> get_remeasure(const json& j) {
    if (!j.contains("remeasure")) return std::nullopt;
    const auto& r = j["remeasure"];
    RemeasureConfig cfg;
    cfg.interval_ms = r.at("interval_ms").get<std::uint64_t>();
    if (cfg.interval_ms == 0)
        throw std::invalid_argument("re-measurement interval must be > 0");
    std::string resp = r.value("on_failure", "alert");
    if (resp == "block")
        cfg.on_failure = measure::FailureResponse::Block;
    else if (resp == "alert")
        cfg.on_failure = measure::FailureResponse::Alert;
    else
        throw std::invalid_argument("on_failure must be block or alert");
    return cfg;
}

TraceEventKind parse_event(const json& j, const std::string& kind) {
    if (kind == "kernel_load") {
        KernelLoad e;
        if (j.contains("uuid")) e.uuid = get_uuid(j, "uuid");
        e.version = j.value("version", 1u);
        e.segments = get_segments(j);
        e.remeasure = get_remeasure(j);
        return e;
    }
    if (kind == "static_component_load") {
        StaticComponentLoad e;
        e.uuid = get_uuid(j, "uuid");
        e.version = j.value("version", 1u);
        e.segments = get_segments(j);
        e.remeasure = get_remeasure(j);
        return e;
    }
    if (kind == "user_ta_load") {
        UserTaLoad e;
        e.uuid = get_uuid(j, "uuid");
        e.version = j.value("version", 1u);
        e.segments = get_segments(j);
        if (j.contains("properties"))
            for (const auto& [k, v] : j["properties"].items())
                e.properties[k] = v.get<std::string>();
        e.remeasure = get_remeasure(j);
        return e;
    }
    if (kind == "ta_invocation") {
        TaInvocation e;
        e.caller = get_opt_uuid(j, "caller");
        e.uuid = get_uuid(j, "uuid");
        e.params = get_hex_bytes(j, "params_hex");
        e.result = j.value("result", 0u);
        return e;
    }
    if (kind == "inter_ta_call") {
        InterTaCall e;
        e.caller_uuid = get_uuid(j, "caller_uuid");
        e.uuid = get_uuid(j, "uuid");
        e.params = get_hex_bytes(j, "params_hex");
        e.result = j.value("result", 0u);
        return e;
    }
    if (kind == "syscall") {
        SyscallEvent e;
        e.caller_uuid = get_opt_uuid(j, "caller_uuid");
        e.number = j.at("number").get<std::uint32_t>();
        e.params = get_hex_bytes(j, "params_hex");
        e.result = j.value("result", 0u);
        return e;
    }
    if (kind == "tick") return Tick{};
    throw std::invalid_argument("unknown event kind: " + kind);
}

AttackInjection parse_attack(const json& j, const std::string& kind) {
    if (kind == "tamper_segment") {
        TamperSegment a;
        a.uuid = get_uuid(j, "uuid");
        a.segment_label = j.at("segment_label").get<std::string>();
        a.byte_offset = j.at("byte_offset").get<std::size_t>();
        a.xor_value = std::uint8_t(j.value("xor_value", 0xffu));
        a.at_ms = j.at("at_ms").get<std::uint64_t>();
        if (a.xor_value == 0) throw std::invalid_argument("xor_value must be nonzero");
        return a;
    }
    if (kind == "downgrade_version") {
        DowngradeVersion a;
        a.uuid = get_uuid(j, "uuid");
        a.to_version = j.at("to_version").get<std::uint32_t>();
        return a;
    }
    if (kind == "mutate_log_byte") {
        MutateLogByte a;
        a.entry_index = j.at("entry_index").get<std::size_t>();
        a.byte_offset = j.at("byte_offset").get<std::size_t>();
        a.xor_value = std::uint8_t(j.value("xor_value", 0x01u));
        if (a.xor_value == 0) throw std::invalid_argument("xor_value must be nonzero");
        return a;
    }
    if (kind == "replay_response") return ReplayResponse{};
    if (kind == "forge_quote") {
        ForgeQuote a;
        a.wrong_key_seed = j.value("wrong_key_seed", std::uint64_t(1));
        return a;
    }
    throw std::invalid_argument("unknown attack kind: " + kind);
}

json segments_to_json(const std::vector<measure::Segment>& segs) {
    json arr = json::array();
    for (const auto& s : segs)
        arr.push_back({{"label", s.label},
                       {"data_hex", to_hex(s.data.data(), s.data.size())}});
    return arr;
}

json remeasure_to_json(const RemeasureConfig& cfg) {
    return {{"interval_ms", cfg.interval_ms},
            {"on_failure",
             cfg.on_failure == measure::FailureResponse::Block ? "block" : "alert"}};
}

} // namespace

Trace parse_trace(const std::string& text) {
    Trace trace;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::uint64_t> last_ts;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(line_no, e.what());
        }

        try {
            if (j.contains("attack")) {
                trace.attacks.push_back(
                    parse_attack(j, j["attack"].get<std::string>()));
                continue;
            }
            std::uint64_t ts = j.at("ts").get<std::uint64_t>();
            if (last_ts && ts < *last_ts)
                throw NonMonotoneTimestamp(
                    line_no, "timestamp " + std::to_string(ts) +
                                 " precedes " + std::to_string(*last_ts));
            last_ts = ts;
            TraceEvent ev;
            ev.timestamp_ms = ts;
            ev.kind = parse_event(j, j.at("event").get<std::string>());
            trace.events.push_back(std::move(ev));
        } catch (const NonMonotoneTimestamp&) {
            throw;
        } catch (const json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return trace;
}

Trace load_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_trace(buf.str());
}

std::string trace_to_jsonl(const Trace& trace) {
    std::ostringstream out;
    for (const auto& ev : trace.events) {
        json j;
        j["ts"] = ev.timestamp_ms;
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, KernelLoad>) {
                    j["event"] = "kernel_load";
                    j["uuid"] = to_hex(e.uuid);
                    j["version"] = e.version;
                    j["segments"] = segments_to_json(e.segments);
                    if (e.remeasure) j["remeasure"] = remeasure_to_json(*e.remeasure);
                } else if constexpr (std::is_same_v<T, StaticComponentLoad>) {
                    j["event"] = "static_component_load";
                    j["uuid"] = to_hex(e.uuid);
                    j["version"] = e.version;
                    j["segments"] = segments_to_json(e.segments);
                    if (e.remeasure) j["remeasure"] = remeasure_to_json(*e.remeasure);
                } else if constexpr (std::is_same_v<T, UserTaLoad>) {
                    j["event"] = "user_ta_load";
                    j["uuid"] = to_hex(e.uuid);
                    j["version"] = e.version;
                    j["segments"] = segments_to_json(e.segments);
                    if (!e.properties.empty()) j["properties"] = e.properties;
                    if (e.remeasure) j["remeasure"] = remeasure_to_json(*e.remeasure);
                } else if constexpr (std::is_same_v<T, TaInvocation>) {
                    j["event"] = "ta_invocation";
                    if (e.caller) j["caller"] = to_hex(*e.caller);
                    j["uuid"] = to_hex(e.uuid);
                    j["params_hex"] = to_hex(e.params.data(), e.params.size());
                    j["result"] = e.result;
                } else if constexpr (std::is_same_v<T, InterTaCall>) {
                    j["event"] = "inter_ta_call";
                    j["caller_uuid"] = to_hex(e.caller_uuid);
                    j["uuid"] = to_hex(e.uuid);
                    j["params_hex"] = to_hex(e.params.data(), e.params.size());
                    j["result"] = e.result;
                } else if constexpr (std::is_same_v<T, SyscallEvent>) {
                    j["event"] = "syscall";
                    if (e.caller_uuid) j["caller_uuid"] = to_hex(*e.caller_uuid);
                    j["number"] = e.number;
                    j["params_hex"] = to_hex(e.params.data(), e.params.size());
                    j["result"] = e.result;
                } else {
                    j["event"] = "tick";
                }
            },
            ev.kind);
        out << j.dump() << "\n";
    }
    for (const auto& atk : trace.attacks) {
        json j;
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, TamperSegment>) {
                    j["attack"] = "tamper_segment";
                    j["uuid"] = to_hex(a.uuid);
                    j["segment_label"] = a.segment_label;
                    j["byte_offset"] = a.byte_offset;
                    j["xor_value"] = a.xor_value;
                    j["at_ms"] = a.at_ms;
                } else if constexpr (std::is_same_v<T, DowngradeVersion>) {
                    j["attack"] = "downgrade_version";
                    j["uuid"] = to_hex(a.uuid);
                    j["to_version"] = a.to_version;
                } else if constexpr (std::is_same_v<T, MutateLogByte>) {
                    j["attack"] = "mutate_log_byte";
                    j["entry_index"] = a.entry_index;
                    j["byte_offset"] = a.byte_offset;
                    j["xor_value"] = a.xor_value;
                } else if constexpr (std::is_same_v<T, ReplayResponse>) {
                    j["attack"] = "replay_response";
                } else {
                    j["attack"] = "forge_quote";
                    j["wrong_key_seed"] = a.wrong_key_seed;
                }
            },
            atk);
        out << j.dump() << "\n";
    }
    return out.str();
}

} // namespace pdrima::sim
