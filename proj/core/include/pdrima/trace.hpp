#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pdrima/measure.hpp"

namespace pdrima::sim {

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

struct NonMonotoneTimestamp : std::runtime_error {
    NonMonotoneTimestamp(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

struct RemeasureConfig {
    std::uint64_t interval_ms = 0;
    measure::FailureResponse on_failure = measure::FailureResponse::Alert;
};

struct KernelLoad {
    Uuid uuid{}; // all-zero by default
    std::uint32_t version = 1;
    std::vector<measure::Segment> segments;
    std::optional<RemeasureConfig> remeasure;
};

struct StaticComponentLoad {
    Uuid uuid{};
    std::uint32_t version = 1;
    std::vector<measure::Segment> segments;
    std::optional<RemeasureConfig> remeasure;
};

struct UserTaLoad {
    Uuid uuid{};
    std::uint32_t version = 1;
    std::vector<measure::Segment> segments;
    std::map<std::string, std::string> properties;
    std::optional<RemeasureConfig> remeasure;
};

struct TaInvocation {
    std::optional<Uuid> caller;
    Uuid uuid{};
    std::vector<std::uint8_t> params;
    std::uint32_t result = 0;
};

struct InterTaCall {
    Uuid caller_uuid{};
    Uuid uuid{};
    std::vector<std::uint8_t> params;
    std::uint32_t result = 0;
};

struct SyscallEvent {
    std::optional<Uuid> caller_uuid;
    std::uint32_t number = 0;
    std::vector<std::uint8_t> params;
    std::uint32_t result = 0;
};

struct Tick {};

using TraceEventKind = std::variant<KernelLoad, StaticComponentLoad, UserTaLoad,
                                    TaInvocation, InterTaCall, SyscallEvent, Tick>;

struct TraceEvent {
    std::uint64_t timestamp_ms = 0;
    TraceEventKind kind;
};

struct TamperSegment {
    Uuid uuid{};
    std::string segment_label;
    std::size_t byte_offset = 0;
    std::uint8_t xor_value = 0xff;
    std::uint64_t at_ms = 0;
};

struct DowngradeVersion {
    Uuid uuid{};
    std::uint32_t to_version = 0;
};

struct MutateLogByte {
    std::size_t entry_index = 0;
    std::size_t byte_offset = 0;
    std::uint8_t xor_value = 0x01;
};

struct ReplayResponse {};

struct ForgeQuote {
    std::uint64_t wrong_key_seed = 0;
};

using AttackInjection = std::variant<TamperSegment, DowngradeVersion,
                                     MutateLogByte, ReplayResponse, ForgeQuote>;

struct Trace {
    std::vector<TraceEvent> events;
    std::vector<AttackInjection> attacks;
};

/// Parses a line-delimited JSON trace; validates timestamp monotonicity.
Trace parse_trace(const std::string& text);
Trace load_trace(const std::string& path);

/// Round trip for fixtures and `inspect`.
std::string trace_to_jsonl(const Trace& trace);

} // namespace pdrima::sim
