#include "pdrima/sim.hpp"

#include <algorithm>

namespace pdrima::sim {

namespace {

struct Runner {
    const policy::PolicySet& policy_set;
    const appraise::Rml& rml;
    sml::Sml& log;
    sml::VpcrBank& bank;
    SimReport& report;

    std::map<Uuid, measure::MeasurableObject> registry;
    std::map<Uuid, measure::RemeasureState> remeasure_states;
    std::map<Uuid, measure::FailureResponse> load_failure_response;
    std::vector<std::pair<TamperSegment, bool>> tampers; // (injection, applied)
    std::map<Uuid, std::uint32_t> downgrades;

    void apply_tamper_to(measure::MeasurableObject& obj, const TamperSegment& t) {
        for (auto& seg : obj.segments) {
            if (seg.label != t.segment_label) continue;
            if (t.byte_offset < seg.data.size())
                seg.data[t.byte_offset] ^= t.xor_value;
            return;
        }
    }

    /// Fires every pending tamper whose time has come against registered
    /// objects.
    void apply_due_tampers(std::uint64_t now_ms) {
        for (auto& [t, applied] : tampers) {
            if (applied || t.at_ms > now_ms) continue;
            auto it = registry.find(t.uuid);
            if (it == registry.end()) continue;
            apply_tamper_to(it->second, t);
            applied = true;
        }
    }

    void append_entry(std::uint8_t vpcr, policy::EventType event_type,
                      const sml::EventData& data, const Digest& result) {
        log.append(bank, vpcr, event_type, sml::encode_event_data(data), result);
        ++report.entries_appended;
    }

    template <typename LoadEvent>
    void handle_static_load(const LoadEvent& ev, measure::ObjectKind kind,
                            std::uint64_t now_ms) {
        measure::MeasurableObject obj;
        obj.uuid = ev.uuid;
        obj.kind = kind;
        obj.version = ev.version;
        obj.segments = ev.segments;
        if constexpr (std::is_same_v<LoadEvent, UserTaLoad>)
            obj.properties = ev.properties;

        if (auto it = downgrades.find(obj.uuid); it != downgrades.end())
            obj.version = it->second;
        // Tampers scheduled at or before the load hit the incoming image.
        for (auto& [t, applied] : tampers) {
            if (applied || t.at_ms > now_ms || t.uuid != obj.uuid) continue;
            apply_tamper_to(obj, t);
            applied = true;
        }

        auto outcome = measure::static_measure(obj, policy_set, now_ms);
        registry[obj.uuid] = obj;
        if (!outcome.logged) return; // bypass: no entry, no baseline

        sml::StaticEventData data;
        data.uuid = obj.uuid;
        data.kind = kind;
        data.version = obj.version;
        data.measured = outcome.digest;

        if (outcome.appraisal_required) {
            auto result =
                appraise::appraise(rml, obj.uuid, outcome.digest, obj.version);
            data.appraisal = sml::logged_appraisal_from(result);
            if (result != appraise::AppraisalOutcome::Trusted) {
                report.appraisal_failures.push_back(
                    to_hex(obj.uuid) + ":" +
                    appraise::appraisal_outcome_name(result));
                auto resp = ev.remeasure
                                ? ev.remeasure->on_failure
                                : measure::FailureResponse::Alert;
                if (resp == measure::FailureResponse::Block)
                    report.blocked_calls.push_back("load:" + to_hex(obj.uuid));
            }
        }

        if (ev.remeasure) {
            measure::RemeasureState st;
            st.target_uuid = obj.uuid;
            // Baseline covers static segments only, matching what
            // re-measurement will hash later.
            st.baseline = measure::measure_segments(obj.segments);
            st.last_measured_ms = now_ms;
            st.interval_ms = ev.remeasure->interval_ms;
            st.on_failure = ev.remeasure->on_failure;
            remeasure_states[obj.uuid] = st;
        }

        append_entry(measure::vpcr_index_for(kind),
                     measure::static_event_for(kind), data, outcome.digest);
    }

    /// Runs a due re-measurement for one target; returns true when the
    /// intercepted call must be blocked.
    bool remeasure_target(const Uuid& uuid, std::uint64_t now_ms) {
        auto st = remeasure_states.find(uuid);
        if (st == remeasure_states.end()) return false;
        auto obj = registry.find(uuid);
        if (obj == registry.end()) return false;

        auto outcome = measure::maybe_remeasure(st->second, obj->second, now_ms);
        if (outcome.result == measure::RemeasureResult::NotDue) return false;

        sml::RemeasureEventData data;
        data.uuid = uuid;
        data.measured = outcome.measured;
        bool block = false;
        if (outcome.result == measure::RemeasureResult::Passed) {
            data.outcome = sml::RemeasureLogOutcome::Passed;
        } else {
            report.remeasure_failures.push_back(to_hex(uuid));
            if (outcome.response == measure::FailureResponse::Block) {
                data.outcome = sml::RemeasureLogOutcome::FailedBlock;
                block = true;
            } else {
                data.outcome = sml::RemeasureLogOutcome::FailedAlert;
            }
        }
        append_entry(measure::vpcr_index_for(obj->second.kind),
                     policy::EventType::ReMeasurement, data, outcome.measured);
        return block;
    }

    void handle_dynamic(policy::EventType event,
                        const std::optional<Uuid>& caller,
                        const std::optional<Uuid>& subject,
                        const std::optional<std::uint32_t>& syscall_number,
                        const std::vector<std::uint8_t>& params,
                        std::uint32_t result, std::uint64_t now_ms) {
        // Lazy re-measurement of the intercepted target runs first.
        std::optional<Uuid> target = subject ? subject : caller;
        if (target && remeasure_target(*target, now_ms)) {
            report.blocked_calls.push_back(
                std::string(policy::event_type_name(event)) + ":" +
                to_hex(*target));
            return; // Block suppresses the call's dynamic measurement
        }

        policy::EventContext ctx;
        ctx.event = event;
        ctx.subject_uuid = subject;
        ctx.caller_uuid = caller;
        ctx.syscall_number = syscall_number;
        ctx.object_size = params.size();
        ctx.timestamp_ms = now_ms;
        if (!policy::match_rule(policy_set, ctx)) return; // bypass

        measure::SyscallRecord rec;
        rec.d1_metadata.event = event;
        rec.d1_metadata.caller_uuid = caller;
        rec.d1_metadata.subject_uuid = subject;
        rec.d1_metadata.syscall_number = syscall_number;
        rec.d1_metadata.timestamp_ms = now_ms;
        rec.d2_parameters = params;
        rec.d3_result = result;

        Digest digest = measure::measure_syscall(rec);
        sml::DynamicEventData data;
        data.metadata = rec.d1_metadata;
        data.parameter_len = std::uint32_t(params.size());
        data.result_code = result;
        data.measured = digest;
        append_entry(3, event, data, digest);
    }

    void handle_event(const TraceEvent& ev) {
        std::uint64_t now = ev.timestamp_ms;
        apply_due_tampers(now);
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, KernelLoad>) {
                    handle_static_load(e, measure::ObjectKind::Kernel, now);
                } else if constexpr (std::is_same_v<T, StaticComponentLoad>) {
                    handle_static_load(e, measure::ObjectKind::StaticComponent, now);
                } else if constexpr (std::is_same_v<T, UserTaLoad>) {
                    handle_static_load(e, measure::ObjectKind::UserTa, now);
                } else if constexpr (std::is_same_v<T, TaInvocation>) {
                    handle_dynamic(policy::EventType::TaInvocation, e.caller,
                                   e.uuid, std::nullopt, e.params, e.result, now);
                } else if constexpr (std::is_same_v<T, InterTaCall>) {
                    handle_dynamic(policy::EventType::InterTaCall, e.caller_uuid,
                                   e.uuid, std::nullopt, e.params, e.result, now);
                } else if constexpr (std::is_same_v<T, SyscallEvent>) {
                    handle_dynamic(policy::EventType::Syscall, e.caller_uuid,
                                   std::nullopt, e.number, e.params, e.result, now);
                } else {
                    // Tick: due-check every re-measurement target.
                    for (auto& [uuid, st] : remeasure_states)
                        remeasure_target(uuid, now);
                }
            },
            ev.kind);
        ++report.events_processed;
    }
};

} // namespace

DeviceResult run_device(const Trace& trace,
                        std::span<const std::uint8_t> policy_blob,
                        std::span<const std::uint8_t> rml_file,
                        const PublicKey& pk_rml, std::uint32_t sml_capacity) {
    policy::PolicySet policy_set = policy::load_policy(policy_blob);
    appraise::Rml rml = appraise::load_rml(rml_file, pk_rml);

    DeviceResult result{SimReport{}, sml::Sml(sml_capacity), sml::VpcrBank{}};
    Runner runner{policy_set, rml, result.sml, result.bank, result.report};

    for (const auto& atk : trace.attacks) {
        if (auto* t = std::get_if<TamperSegment>(&atk))
            runner.tampers.emplace_back(*t, false);
        else if (auto* d = std::get_if<DowngradeVersion>(&atk))
            runner.downgrades[d->uuid] = d->to_version;
        // Log/attestation-stage injections are consumed by the scenario
        // driver, not the device loop.
    }

    for (const auto& ev : trace.events) runner.handle_event(ev);

    result.report.final_vpcrs = result.bank.registers();
    return result;
}

} // namespace pdrima::sim
