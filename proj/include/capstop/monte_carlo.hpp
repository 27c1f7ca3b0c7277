#pragma once

#include <cstdint>
#include <functional>

#include "capstop/types.hpp"

namespace capstop {

struct McConfig {
    long long n_paths = 100000;
    int n_steps = 256;       ///< time steps per path (exact GBM increments)
    std::uint64_t seed = 1;  ///< results are bit-identical for a given seed and config
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct HitKilledEstimate {
    McEstimate hit;     ///< E[e^{-r(tau-t)} 1{tau < T}]
    McEstimate killed;  ///< E[e^{-r(T-t)} G(S_T) 1{tau >= T}]
};

/// Monte Carlo estimates of the two first-hitting expectations, with a
/// Brownian-bridge crossing test each step so the barrier is monitored
/// continuously. Paths are partitioned into fixed chunks with counter-based
/// RNG streams, so results do not depend on thread scheduling.
HitKilledEstimate mc_hitting_expectations(double spot, double level, double t, double T,
                                          const MarketParams& p,
                                          const std::function<double(double)>& payoff,
                                          const McConfig& cfg);

/// Plain discounted terminal expectation E[e^{-r(T-t)} G(S_T)] (no barrier).
McEstimate mc_terminal_expectation(double spot, double t, double T, const MarketParams& p,
                                   const std::function<double(double)>& payoff,
                                   const McConfig& cfg);

}  // namespace capstop
