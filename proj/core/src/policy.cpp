#include "pdrima/policy.hpp"

#include <algorithm>

namespace pdrima::policy {

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'D', 'P', 'L'};
constexpr std::uint8_t kVersion = 0x01;

void encode_condition(Encoder& e, const Condition& c) {
    if (auto* u = std::get_if<UuidEquals>(&c)) {
        e.u8(0);
        e.uuid(u->value);
    } else if (auto* s = std::get_if<SyscallNumberEquals>(&c)) {
        e.u8(1);
        e.u32(s->value);
    } else if (auto* cu = std::get_if<CallerUuidEquals>(&c)) {
        e.u8(2);
        e.uuid(cu->value);
    } else {
        e.u8(3);
        e.u64(std::get<MinSizeBytes>(c).value);
    }
}

Condition decode_condition(Decoder& d) {
    switch (d.u8()) {
    case 0: return UuidEquals{d.uuid()};
    case 1: return SyscallNumberEquals{d.u32()};
    case 2: return CallerUuidEquals{d.uuid()};
    case 3: return MinSizeBytes{d.u64()};
    default: throw DecodeError("unknown condition kind");
    }
}

} // namespace

EventType event_type_from_code(std::uint8_t code) {
    if (code > std::uint8_t(EventType::ReMeasurement))
        throw DecodeError("unknown event type code");
    return EventType(code);
}

const char* event_type_name(EventType e) {
    switch (e) {
    case EventType::KernelLoad: return "kernel_load";
    case EventType::StaticComponentLoad: return "static_component_load";
    case EventType::UserTaLoad: return "user_ta_load";
    case EventType::TaInvocation: return "ta_invocation";
    case EventType::InterTaCall: return "inter_ta_call";
    case EventType::Syscall: return "syscall";
    case EventType::ReMeasurement: return "re_measurement";
    }
    return "unknown";
}

bool condition_matches(const Condition& c, const EventContext& ctx) {
    if (auto* u = std::get_if<UuidEquals>(&c))
        return ctx.subject_uuid && *ctx.subject_uuid == u->value;
    if (auto* s = std::get_if<SyscallNumberEquals>(&c))
        return ctx.syscall_number && *ctx.syscall_number == s->value;
    if (auto* cu = std::get_if<CallerUuidEquals>(&c))
        return ctx.caller_uuid && *ctx.caller_uuid == cu->value;
    const auto& m = std::get<MinSizeBytes>(c);
    return ctx.object_size && *ctx.object_size >= m.value;
}

bool rule_matches(const PolicyRule& r, const EventContext& ctx) {
    if (r.event != ctx.event) return false;
    for (const auto& c : r.conditions)
        if (!condition_matches(c, ctx)) return false;
    return true;
}

std::vector<std::uint8_t> compile_policy(const std::vector<PolicyRule>& rules) {
    Encoder e;
    e.raw(kMagic);
    e.u8(kVersion);
    e.u32(std::uint32_t(rules.size()));
    for (const auto& r : rules) {
        e.u8(std::uint8_t(r.action));
        e.u8(std::uint8_t(r.event));
        e.u32(std::uint32_t(r.conditions.size()));
        for (const auto& c : r.conditions) encode_condition(e, c);
    }
    return e.take();
}

PolicySet load_policy(std::span<const std::uint8_t> blob) {
    Decoder d(blob);
    auto magic = d.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic))
        throw DecodeError("bad policy magic");
    if (d.u8() != kVersion) throw DecodeError("unsupported policy version");

    PolicySet set;
    std::uint32_t count = d.u32();
    set.rules.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        PolicyRule r;
        std::uint8_t action = d.u8();
        if (action > std::uint8_t(Action::Appraise))
            throw DecodeError("unknown action");
        r.action = Action(action);
        r.event = event_type_from_code(d.u8());
        std::uint32_t nc = d.u32();
        r.conditions.reserve(nc);
        for (std::uint32_t j = 0; j < nc; ++j)
            r.conditions.push_back(decode_condition(d));
        set.rules.push_back(std::move(r));
    }
    d.finish();
    set.blob_digest = hash(blob);
    return set;
}

std::optional<RuleMatch> match_rule(const PolicySet& policy, const EventContext& ctx) {
    for (std::size_t i = 0; i < policy.rules.size(); ++i)
        if (rule_matches(policy.rules[i], ctx))
            return RuleMatch{i, policy.rules[i]};
    return std::nullopt;
}

} // namespace pdrima::policy
