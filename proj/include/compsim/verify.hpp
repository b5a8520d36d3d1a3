// Randomized verification sweeps for the analytic results, shared by
// the CLI `verify` subcommand and the acceptance test binary. Each
// suite runs a self-contained batch of checks and reports counts.
#ifndef COMPSIM_VERIFY_HPP
#define COMPSIM_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace compsim {

struct SuiteResult {
    std::string suite;
    std::string description;
    int checked = 0;
    int failed = 0;
    double elapsed_seconds = 0.0;
    std::vector<std::string> notes;  // first few failure diagnostics / findings

    bool passed() const { return checked > 0 && failed == 0; }
};

// Names, in acceptance order:
//   best-response, homogeneous, stability, bargaining-gap,
//   competition-monotone, heterogeneous, quartic, competition-harm,
//   competition-helps, two-path-stability, experiment-trends, topology
std::vector<std::string> suite_names();

std::string suite_description(const std::string& name);

// Runs one suite. Throws ModelError for an unknown suite name.
SuiteResult run_suite(const std::string& name, uint64_t seed = 12345);

}  // namespace compsim

#endif  // COMPSIM_VERIFY_HPP
