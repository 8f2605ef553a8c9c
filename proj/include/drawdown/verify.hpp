#pragma once

#include "drawdown/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace drawdown {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    int grid_points = 1000;
    // Short Monte-Carlo martingale check; 0 paths skips it.
    int mc_paths = 2000;
    double mc_dt = 2e-3;
    double mc_t = 1.0;
    std::uint64_t mc_seed = 1;
};

/// Runs the dual, primal, policy and (optionally) Monte-Carlo invariants for one parameter set.
/// Solver errors propagate; a failed invariant is reported, not thrown.
std::vector<CheckResult> run_invariant_suite(const ModelParams& params, const VerifyOptions& options = {});

}  // namespace drawdown
