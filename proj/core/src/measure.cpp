#include "pdrima/measure.hpp"

#include "pdrima/codec.hpp"

namespace pdrima::measure {

Digest measure_segments(const std::vector<Segment>& segments) {
    if (segments.empty())
        throw EmptySegmentList("static measurement needs at least one segment");
    Digest chain = Digest::zero();
    for (const auto& seg : segments) {
        Digest seg_hash = hash(seg.data);
        chain = hash_pair(chain, seg_hash);
    }
    return chain;
}

std::vector<std::uint8_t> encode_syscall_metadata(const SyscallMetadata& m) {
    Encoder e;
    e.u8(std::uint8_t(m.event));
    e.optional(m.caller_uuid, [&](const Uuid& u) { e.uuid(u); });
    e.optional(m.subject_uuid, [&](const Uuid& u) { e.uuid(u); });
    e.optional(m.syscall_number, [&](std::uint32_t n) { e.u32(n); });
    e.u64(m.timestamp_ms);
    return e.take();
}

Digest measure_syscall(const SyscallRecord& rec) {
    Encoder e;
    e.raw(encode_syscall_metadata(rec.d1_metadata));
    e.bytes(rec.d2_parameters);
    e.u32(rec.d3_result);
    return hash(e.out());
}

Segment properties_segment(const std::map<std::string, std::string>& props) {
    Encoder e;
    e.u32(std::uint32_t(props.size()));
    for (const auto& [k, v] : props) { // std::map iterates in sorted key order
        e.text(k);
        e.text(v);
    }
    return Segment{"props", e.take()};
}

std::vector<Segment> measured_segments(const MeasurableObject& obj) {
    std::vector<Segment> segs = obj.segments;
    if (obj.kind == ObjectKind::UserTa && !obj.properties.empty())
        segs.push_back(properties_segment(obj.properties));
    return segs;
}

MeasurementOutcome static_measure(const MeasurableObject& obj,
                                  const policy::PolicySet& policy,
                                  std::uint64_t now_ms) {
    std::uint64_t total = 0;
    for (const auto& s : obj.segments) total += s.data.size();

    policy::EventContext ctx;
    ctx.event = static_event_for(obj.kind);
    ctx.subject_uuid = obj.uuid;
    ctx.object_size = total;
    ctx.timestamp_ms = now_ms;

    auto match = policy::match_rule(policy, ctx);
    if (!match) return MeasurementOutcome{}; // bypass

    MeasurementOutcome out;
    out.digest = measure_segments(measured_segments(obj));
    out.appraisal_required = match->rule.action == policy::Action::Appraise;
    out.logged = true;
    out.rule_index = match->index;
    return out;
}

RemeasureOutcome maybe_remeasure(RemeasureState& state,
                                 const MeasurableObject& obj,
                                 std::uint64_t now_ms) {
    RemeasureOutcome out;
    if (obj.uuid != state.target_uuid)
        throw UnknownTarget("re-measurement state does not cover this object");
    if (now_ms - state.last_measured_ms <= state.interval_ms) return out;

    // Re-measurement hashes only the static segments, never properties.
    out.measured = measure_segments(obj.segments);
    if (out.measured == state.baseline) {
        out.result = RemeasureResult::Passed;
        state.last_measured_ms = now_ms; // restart the timer
    } else {
        out.result = RemeasureResult::Failed;
        out.response = state.on_failure;
    }
    return out;
}

policy::EventType static_event_for(ObjectKind kind) {
    switch (kind) {
    case ObjectKind::Kernel: return policy::EventType::KernelLoad;
    case ObjectKind::StaticComponent: return policy::EventType::StaticComponentLoad;
    case ObjectKind::UserTa: return policy::EventType::UserTaLoad;
    }
    return policy::EventType::KernelLoad;
}

std::uint8_t vpcr_index_for(ObjectKind kind) {
    switch (kind) {
    case ObjectKind::Kernel: return 0;
    case ObjectKind::StaticComponent: return 1;
    case ObjectKind::UserTa: return 2;
    }
    return 0;
}

} // namespace pdrima::measure
