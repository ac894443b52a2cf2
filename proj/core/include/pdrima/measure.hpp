#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdrima/crypto.hpp"
#include "pdrima/policy.hpp"

namespace pdrima::measure {

struct EmptySegmentList : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownTarget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Segment {
    std::string label; // non-empty
    std::vector<std::uint8_t> data;
};

enum class ObjectKind : std::uint8_t {
    Kernel = 0,
    StaticComponent = 1,
    UserTa = 2,
};

struct MeasurableObject {
    Uuid uuid{};
    ObjectKind kind = ObjectKind::UserTa;
    std::uint32_t version = 0;
    std::vector<Segment> segments; // order fixed at load time
    std::map<std::string, std::string> properties;
};

enum class FailureResponse : std::uint8_t { Block = 0, Alert = 1 };

struct RemeasureState {
    Uuid target_uuid{};
    Digest baseline;
    std::uint64_t last_measured_ms = 0;
    std::uint64_t interval_ms = 0; // > 0
    FailureResponse on_failure = FailureResponse::Alert;
};

struct SyscallMetadata {
    policy::EventType event = policy::EventType::Syscall;
    std::optional<Uuid> caller_uuid;
    std::optional<Uuid> subject_uuid;
    std::optional<std::uint32_t> syscall_number;
    std::uint64_t timestamp_ms = 0;
};

struct SyscallRecord {
    SyscallMetadata d1_metadata;
    std::vector<std::uint8_t> d2_parameters;
    std::uint32_t d3_result = 0;
};

/// Chains per-segment hashes from the 32-byte zero seed:
/// r = H(r || H(segment data)) for each segment in order.
/// Throws EmptySegmentList when no segments are given.
Digest measure_segments(const std::vector<Segment>& segments);

std::vector<std::uint8_t> encode_syscall_metadata(const SyscallMetadata& m);

/// H(encode(D1) || encode(D2) || encode(D3)).
Digest measure_syscall(const SyscallRecord& rec);

/// The "props" synthetic segment: canonical encoding of the sorted
/// key/value list.
Segment properties_segment(const std::map<std::string, std::string>& props);

/// Full segment list for static measurement, with the synthetic
/// properties segment appended for user-TAs that carry properties.
std::vector<Segment> measured_segments(const MeasurableObject& obj);

struct MeasurementOutcome {
    Digest digest;
    bool appraisal_required = false;
    bool logged = false;
    std::optional<std::size_t> rule_index;
};

/// Policy-gated static measurement; bypasses entirely when no rule matches.
MeasurementOutcome static_measure(const MeasurableObject& obj,
                                  const policy::PolicySet& policy,
                                  std::uint64_t now_ms);

enum class RemeasureResult : std::uint8_t { NotDue, Passed, Failed };

struct RemeasureOutcome {
    RemeasureResult result = RemeasureResult::NotDue;
    FailureResponse response = FailureResponse::Alert; // meaningful on Failed
    Digest measured;                                   // set when due
};

/// Eq-style strict due check: due iff now - last > interval. On a passing
/// re-measurement the timer restarts; the baseline never changes.
RemeasureOutcome maybe_remeasure(RemeasureState& state,
                                 const MeasurableObject& obj,
                                 std::uint64_t now_ms);

policy::EventType static_event_for(ObjectKind kind);
std::uint8_t vpcr_index_for(ObjectKind kind);

} // namespace pdrima::measure
