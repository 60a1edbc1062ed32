#pragma once

// Invariant suites over one covariance chain, reported with observed errors
// against fixed tolerances.

#include <cstdint>
#include <string>
#include <vector>

#include "dtsim/core.hpp"

namespace dtsim {

struct CheckResult {
    std::string name;
    double observed;
    double tolerance;
    bool passed;
    std::string detail;
};

struct VerifyOptions {
    /// Compare the closed form with the simple Brownian motion min formula.
    bool oracle = false;
    int n_omega = 64;
    std::uint64_t rng_seed = 0;
};

std::vector<CheckResult> run_verification(const HChain<double>& chain,
                                          const VerifyOptions& options = {});

/// |a - b| when |b| <= 1, relative otherwise.
double scaled_error(double a, double b);

} // namespace dtsim
