#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pdrima/codec.hpp"
#include "pdrima/crypto.hpp"
#include "pdrima/digest.hpp"

namespace pdrima::policy {

enum class EventType : std::uint8_t {
    KernelLoad = 0,
    StaticComponentLoad = 1,
    UserTaLoad = 2,
    TaInvocation = 3,
    InterTaCall = 4,
    Syscall = 5,
    ReMeasurement = 6,
};

EventType event_type_from_code(std::uint8_t code); // throws DecodeError
const char* event_type_name(EventType e);

enum class Action : std::uint8_t {
    Measure = 0,
    Appraise = 1, // implies measurement
};

struct UuidEquals { Uuid value; bool operator==(const UuidEquals&) const = default; };
struct SyscallNumberEquals { std::uint32_t value; bool operator==(const SyscallNumberEquals&) const = default; };
struct CallerUuidEquals { Uuid value; bool operator==(const CallerUuidEquals&) const = default; };
struct MinSizeBytes { std::uint64_t value; bool operator==(const MinSizeBytes&) const = default; };

using Condition =
    std::variant<UuidEquals, SyscallNumberEquals, CallerUuidEquals, MinSizeBytes>;

struct PolicyRule {
    Action action = Action::Measure;
    EventType event = EventType::KernelLoad;
    std::vector<Condition> conditions;

    bool operator==(const PolicyRule&) const = default;
};

struct PolicySet {
    std::vector<PolicyRule> rules;
    Digest blob_digest;
};

/// Carrier for one intercepted event; absent fields make conditions
/// keyed on them fail, not match vacuously.
struct EventContext {
    EventType event = EventType::KernelLoad;
    std::optional<Uuid> subject_uuid;
    std::optional<Uuid> caller_uuid;
    std::optional<std::uint32_t> syscall_number;
    std::optional<std::uint64_t> object_size;
    std::uint64_t timestamp_ms = 0;
};

bool condition_matches(const Condition& c, const EventContext& ctx);
bool rule_matches(const PolicyRule& r, const EventContext& ctx);

/// Compiles the ordered rule list into the "PDPL" blob. An empty list is
/// legal and yields the always-bypass policy.
std::vector<std::uint8_t> compile_policy(const std::vector<PolicyRule>& rules);

/// Parses a compiled blob; throws DecodeError on bad magic/version/truncation.
PolicySet load_policy(std::span<const std::uint8_t> blob);

struct RuleMatch {
    std::size_t index;
    PolicyRule rule;
};

/// First match in rule order, or nullopt (bypass).
std::optional<RuleMatch> match_rule(const PolicySet& policy, const EventContext& ctx);

} // namespace pdrima::policy
