#pragma once

#include <vector>

#include "capstop/types.hpp"

namespace capstop {

struct LatticeConfig {
    int n_steps = 2000;
    bool snap_switch = true;  ///< force a layer exactly on the cap switch date
    bool american = true;     ///< false: no early exercise (European benchmark)
    double no_exercise_before = 0.0;  ///< layers before this time never exercise
};

/// CRR lattice price of the two-level-cap contract. The cap applying to a
/// layer is chosen by layer time; the layer exactly at the switch date takes
/// the level selected by the cap's continuity convention.
double lattice_price(double spot, double t, const MarketParams& p, const TwoLevelCap& cap,
                     const LatticeConfig& cfg);

struct FrontierLayer {
    double time = 0.0;
    bool any = false;        ///< some node exercises below the lattice ceiling
    double lo = 0.0;         ///< smallest exercising node value
    double hi = 0.0;         ///< largest exercising node value of the lowest run
    bool ray = false;        ///< the exercising run reaches the top lattice node
    bool anomalous = false;  ///< more than one disjoint exercising run in the layer
};

struct FrontierEstimate {
    std::vector<FrontierLayer> layers;  ///< ordered by layer time, first layer at t
    double price = 0.0;
};

/// Same backward induction with per-layer exercise-set summaries retained.
FrontierEstimate lattice_frontier(double spot, double t, const MarketParams& p,
                                  const TwoLevelCap& cap, const LatticeConfig& cfg);

}  // namespace capstop
