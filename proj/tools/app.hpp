#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dtsim::cli {

enum ExitCode : int {
    kOk = 0,
    kVerifyFailed = 1,
    kConfigError = 2,
    kIoError = 3,
    kConvergenceError = 4,
};

struct McConfig {
    int n_paths = 1000;
    int k_max = 8;
    std::uint64_t rng_seed = 0;
};

struct SpectraConfig {
    int n_omega = 256;
    std::optional<long> truncation_override;
};

struct OutputConfig {
    std::string format = "csv"; ///< csv | json
    std::string path = "-";     ///< "-" is standard output
};

struct RunConfig {
    double H = 0.75;
    double alpha = 2.0;
    int T = 2;
    std::optional<std::string> seed_file;
    bool builtin = false;
    McConfig mc;
    SpectraConfig spectra;
    OutputConfig output;
};

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

} // namespace dtsim::cli
