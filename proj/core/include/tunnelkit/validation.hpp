#pragma once

#include <string>
#include <vector>

#include "tunnelkit/config.hpp"

namespace tunnelkit {

struct OracleCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Physics and kinetics oracles: closed forms (Kemble, rectangular action,
// parabolic kappa, Wigner), calibration and monotonicity invariants over the
// configured catalog, and Arrhenius round trips. A check that throws is
// reported as failed with the error message.
std::vector<OracleCheck> run_physics_oracles(const PipelineConfig& config);

}  // namespace tunnelkit
