#pragma once

#include <memory>
#include <vector>

#include "capstop/curve.hpp"
#include "capstop/types.hpp"
#include "capstop/uncapped.hpp"

namespace capstop {

/// Time at which the uncapped boundary crosses the two-level cap schedule,
/// with the corner conventions: maturity when the boundary ends above the
/// second cap; the switch date when the boundary jumps the gap between the
/// two levels; 0 when the boundary stays below the cap throughout.
double cap_cross_time(const Boundary& uncapped, const TwoLevelCap& cap);

/// Constant-cap machinery built on an uncapped solution: the capped boundary
/// is uncapped ∧ level, the price follows from the hitting-time formula or
/// the local-time EEP formula, and the left price slope at the cap is
/// estimated by one-sided differencing of the hitting-time price.
class SingleCapSolution {
public:
    SingleCapSolution(std::shared_ptr<const UncappedSolution> uncapped, double cap_level,
                      int slope_nodes = 400, double eps_frac = 1e-4, int time_panels = 128);

    const MarketParams& params() const { return uncapped_->params(); }
    const UncappedSolution& uncapped() const { return *uncapped_; }
    double cap_level() const { return level_; }
    double maturity() const { return uncapped_->maturity(); }

    /// Root of boundary = cap level on [0, maturity]; 0 / maturity at the corners.
    double cap_cross_time() const { return cross_; }

    /// Price by the hitting-time decomposition: pays cap - K on hitting the
    /// cap before the crossing time, else continues as the uncapped call.
    /// Valid for any t < maturity (constant-cap contract).
    double price_via_hitting(double spot, double t) const;

    /// Price by the local-time EEP formula off the European capped benchmark.
    double price_via_local_time(double spot, double t) const;

    /// Region-dispatched price (exact payoff inside the exercise region).
    double price(double spot, double t) const;

    /// C_S(cap-, t): exactly 1 from the crossing time on, estimated before it.
    double cap_slope(double t) const;
    const std::vector<double>& cap_slope_values() const { return slope_values_; }
    const TimeGrid& cap_slope_grid() const { return slope_grid_; }
    double cap_slope_error_estimate() const { return slope_error_; }

    /// Capped boundary (uncapped ∧ level) sampled on [from, to].
    Boundary capped_boundary(double from, double to, int n_steps) const;

private:
    double local_time_term(double spot, double t) const;

    std::shared_ptr<const UncappedSolution> uncapped_;
    double level_;
    double cross_;
    double eps_frac_;
    int time_panels_;
    PriceCurve price_at_cross_;  ///< uncapped price at the crossing time, on (0, cap)
    TimeGrid slope_grid_;
    std::vector<double> slope_values_;
    double slope_error_ = 0.0;
};

/// Max residual of the capped-boundary integral equation over the nodes in
/// [max(from_time, crossing), maturity]; the equation coincides with the
/// uncapped one there. Returns 0 for the infinite-boundary regime.
double verify_capped_boundary_equation(const SingleCapSolution& s, double from_time);

}  // namespace capstop
