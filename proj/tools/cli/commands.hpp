#pragma once

#include "drsoc/nested.hpp"
#include "drsoc/scenario_tree.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace drsoc::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2, kSolverError = 3 };

struct RunConfig {
    std::string command; ///< solve | check | simulate | gen
    std::string target;  ///< gen only: inventory | no-saddle
    std::string input;
    std::string out; ///< empty writes to the output stream
    std::string config;
    std::string report;
    std::string nature = "worst"; ///< simulate: worst | reference | <file>
    std::string mode = "all";
    double tol = kSaddleTol;
    std::size_t budget = kDefaultNodeBudget;
    std::uint64_t seed = 0;
    std::size_t samples = 100000;
    unsigned threads = 0;
};

/// Runs one command. Reports go to `out` (or cfg.out), diagnostics to `err`
/// as a JSON object. Returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses the command line and runs it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace drsoc::cli
