#pragma once

#include <cstddef>

#include "capstop/types.hpp"

namespace capstop {

/// American uncapped call: exercise boundary solved by backward induction on
/// its recursive integral equation, and the early-exercise-premium price.
class UncappedSolution {
public:
    /// Grid must span [0, maturity]. With delta == 0 the boundary is infinite
    /// everywhere and the price collapses to the European call.
    static UncappedSolution solve(const MarketParams& p, const TimeGrid& grid);

    const MarketParams& params() const { return params_; }
    const Boundary& boundary() const { return boundary_; }
    double maturity() const { return boundary_.end(); }
    bool boundary_infinite() const { return infinite_; }
    double boundary_at(double t) const { return boundary_.value_at(t); }

    /// EEP price: European call plus the discounted exercise-region benefit.
    double price(double spot, double t) const;
    double premium(double spot, double t) const;

    /// Residual of the discretized boundary equation at a stored node.
    double equation_residual(std::size_t node) const;
    double max_equation_residual(double from, double to) const;

private:
    UncappedSolution(MarketParams p, Boundary b, bool infinite)
        : params_(p), boundary_(std::move(b)), infinite_(infinite) {}

    double premium_on_nodes(double spot, std::size_t first_node) const;

    MarketParams params_;
    Boundary boundary_;
    bool infinite_;
};

}  // namespace capstop
