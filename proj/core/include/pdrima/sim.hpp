#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdrima/appraise.hpp"
#include "pdrima/sml.hpp"
#include "pdrima/trace.hpp"

namespace pdrima::sim {

struct SimReport {
    std::uint32_t events_processed = 0;
    std::uint32_t entries_appended = 0;
    std::vector<std::string> appraisal_failures;
    std::vector<std::string> remeasure_failures;
    std::vector<std::string> blocked_calls;
    std::array<Digest, 4> final_vpcrs{};
};

struct DeviceResult {
    SimReport report;
    sml::Sml sml;
    sml::VpcrBank bank;
};

/// Drives the monitor from a trace: static loads measure (and appraise)
/// under the policy, dynamic events pass through lazy re-measurement
/// checks before measurement, ticks advance the simulated clock. The RML
/// signature is verified before any event is processed.
DeviceResult run_device(const Trace& trace,
                        std::span<const std::uint8_t> policy_blob,
                        std::span<const std::uint8_t> rml_file,
                        const PublicKey& pk_rml,
                        std::uint32_t sml_capacity = sml::kDefaultCapacity);

} // namespace pdrima::sim
