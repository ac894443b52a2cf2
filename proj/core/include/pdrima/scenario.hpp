#pragma once

#include <string>
#include <vector>

#include "pdrima/attest.hpp"
#include "pdrima/sim.hpp"

namespace pdrima::sim {

struct UnknownScenario : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioCheck {
    std::string description;
    bool passed = false;
};

struct ScenarioResult {
    std::string name;
    bool passed = false;
    std::vector<ScenarioCheck> checks;
    std::vector<attest::Verdict> verdicts; // one per attestation exchange run
    SimReport report;
};

const std::vector<std::string>& scenario_names();

/// Runs one registry scenario (device trace + attestation loopback) and
/// asserts its documented verdict/finding codes. Throws UnknownScenario.
ScenarioResult run_scenario(const std::string& name);

} // namespace pdrima::sim
