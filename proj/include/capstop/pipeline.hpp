#pragma once

#include <memory>
#include <string>

#include "capstop/config.hpp"
#include "capstop/two_level.hpp"

namespace capstop {

struct RunOutputs {
    std::string boundaries_csv;
    std::string times_file;
    std::string prices_csv;
    std::string diagnostics_file;
};

/// Execute the full pipeline for one configuration: solve the uncapped and
/// capped boundaries, classify, run the case's backward induction, price the
/// requested points, and write the four output files into cfg.out_dir.
/// With run_oracle, lattice (and optionally Monte Carlo) deltas are appended
/// to the diagnostics file.
RunOutputs run(const RunConfig& cfg, bool run_oracle = false);

/// Same, returning the solution alongside the outputs.
RunOutputs run(const RunConfig& cfg, bool run_oracle,
               std::shared_ptr<const TwoLevelSolution>& solution_out);

}  // namespace capstop
