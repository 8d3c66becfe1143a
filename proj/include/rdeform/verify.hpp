#pragma once

// The verification suite: nine numbered checks of the geometry engine, the
// linearization, the boundary-value solver and the evolution, each with a
// fixed tolerance. Used by `riemann-deform verify` and the acceptance test.

#include "rdeform/polar_grid.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace rdeform {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    // Named sub-cases with their own verdicts, where a check has several.
    std::vector<std::pair<std::string, bool>> parts;
};

struct VerifyOptions {
    GridSpec holomorphic_grid{32, 128};
    GridSpec cap_grid{32, 128};
    GridSpec closed_grid{24, 96};
    GridSpec evolution_grid{32, 128};
    GridSpec small_grid{16, 64}; // Jacobian and remainder checks
    unsigned seed = 0;
    double tau_kernel = 1e-7;
    bool enforce_runtime = true;      // runtime limits are part of the pass condition
    std::vector<int> only;            // empty: all checks
    std::function<void(const CheckResult&)> on_result;
    std::function<void(const std::string&)> log; // progress lines
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts);

std::string format_result(const CheckResult& r);

} // namespace rdeform
