#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace capstop {

/// Risk-neutral model parameters and strike. Immutable after construction.
struct MarketParams {
    double r;       ///< interest rate (per year, > 0)
    double delta;   ///< dividend yield (per year, >= 0)
    double sigma;   ///< volatility (per sqrt(year), > 0)
    double strike;  ///< strike (currency, > 0)

    MarketParams(double r_, double delta_, double sigma_, double strike_)
        : r(r_), delta(delta_), sigma(sigma_), strike(strike_) {
        if (!(r > 0.0)) throw std::invalid_argument("MarketParams: r must be > 0");
        if (!(delta >= 0.0)) throw std::invalid_argument("MarketParams: delta must be >= 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("MarketParams: sigma must be > 0");
        if (!(strike > 0.0)) throw std::invalid_argument("MarketParams: strike must be > 0");
    }
};

enum class CapContinuity { RightContinuous, LeftContinuous };

/// Two-level cap schedule: level1 before the switch date, level2 from the
/// switch date to maturity. A decreasing cap must be left-continuous.
struct TwoLevelCap {
    double level1;       ///< cap before the switch date (currency)
    double level2;       ///< cap from the switch date on (currency)
    double switch_time;  ///< switch date (years)
    double maturity;     ///< maturity (years)
    CapContinuity continuity;

    TwoLevelCap(double level1_, double level2_, double switch_time_, double maturity_,
                CapContinuity continuity_ = CapContinuity::RightContinuous)
        : level1(level1_), level2(level2_), switch_time(switch_time_), maturity(maturity_),
          continuity(continuity_) {}

    void validate(const MarketParams& p) const {
        if (!(level1 > p.strike) || !(level2 > p.strike))
            throw std::invalid_argument("TwoLevelCap: cap levels must exceed the strike");
        if (!(switch_time > 0.0) || !(switch_time < maturity))
            throw std::invalid_argument("TwoLevelCap: need 0 < switch_time < maturity");
        if (level1 > level2 && continuity != CapContinuity::LeftContinuous)
            throw std::invalid_argument(
                "TwoLevelCap: a decreasing cap is only supported with the left-continuous "
                "convention (the right-continuous variant can lack an optimal exercise rule)");
    }

    /// Cap level applying to an exercise at time t.
    double level_at(double t) const {
        if (continuity == CapContinuity::LeftContinuous)
            return t <= switch_time ? level1 : level2;
        return t < switch_time ? level1 : level2;
    }
};

/// Structural regime of the pre-switch exercise region.
enum class CaseLabel { CaseI, CaseII, CaseIII, Degenerate };

const char* to_string(CaseLabel c);

/// Uniformly spaced time grid on [t_start, t_end] with n_steps intervals.
class TimeGrid {
public:
    TimeGrid(double t_start, double t_end, int n_steps);

    double start() const { return t_start_; }
    double end() const { return t_end_; }
    int steps() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) + 1; }
    double spacing() const { return h_; }

    double node(std::size_t i) const {
        return i == static_cast<std::size_t>(n_) ? t_end_ : t_start_ + h_ * static_cast<double>(i);
    }
    bool contains(double t) const { return t >= t_start_ - tol_ && t <= t_end_ + tol_; }

    /// Largest i with node(i) <= t (clamped so that i+1 is always valid).
    std::size_t segment_index(double t) const;

private:
    double t_start_, t_end_, h_, tol_;
    int n_;
};

/// Exercise-boundary curve on a time grid. Node values are positive levels or
/// +infinity; evaluation between nodes is linear, and any query falling next
/// to an infinite node is infinite unless it lands exactly on a finite node.
class Boundary {
public:
    static double infinite_value() { return std::numeric_limits<double>::infinity(); }

    Boundary(TimeGrid grid, std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double start() const { return grid_.start(); }
    double end() const { return grid_.end(); }
    bool contains(double t) const { return grid_.contains(t); }

    double value_at(double t) const;
    bool finite_at(double t) const { return std::isfinite(value_at(t)); }
    bool all_infinite() const;
    bool any_infinite() const;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

struct NodeResidual {
    double t = 0.0;
    double residual = 0.0;
    bool flagged = false;  ///< residual above the per-node tolerance after refinement
};

struct SolveDiagnostics {
    double uncapped_max_residual = 0.0;
    double pre_switch_max_residual = 0.0;
    std::vector<NodeResidual> pre_switch_residuals;
    /// Estimated price slope just above the pre-switch boundary (smooth fit would make it 0).
    std::vector<double> boundary_slopes;
    /// Adjacent-node jumps exceeding 10*h*K in Cases I-II (reported, not fatal).
    std::vector<std::string> notes;
};

/// Solved boundaries and structural times of a two-level-cap contract.
struct SolveReport {
    CaseLabel case_label = CaseLabel::Degenerate;
    std::optional<Boundary> uncapped;     ///< boundary of the uncapped call on [0, T2]
    std::optional<Boundary> post_switch;  ///< boundary on [switch_time, T2] (uncapped ∧ level2)
    std::optional<Boundary> pre_switch;   ///< upper boundary of the pre-switch exercise set
    std::optional<double> dominance_time;   ///< before this time, exercising above level1 beats any waiting (t0)
    std::optional<double> band_open_time;   ///< backward time at which the band above level1 opens (T0)
    std::optional<double> band_close_time;  ///< Case I: last pre-switch time with a non-empty exercise set (t1)
    double cap_cross_time = 0.0;            ///< where the uncapped boundary crosses the cap schedule (t*)
    std::optional<double> cap_touch_time;   ///< Case III: last time the boundary sits at level1 (t*1)
    SolveDiagnostics diagnostics;
};

/// Three-way structural classification given the uncapped boundary value at
/// the switch date (+infinity allowed). The knife edge level1 == boundary
/// falls in Case II, matching the weak inequality in its defining condition.
CaseLabel classify_case(const MarketParams& p, const TwoLevelCap& cap, double uncapped_at_switch);

/// Latest time at which the discounted best post-switch payoff still matches
/// immediate exercise at the first cap: switch_time - log((L2-K)/(L1-K))/r.
/// Requires level1 <= level2; absent when the closed form is negative.
std::optional<double> dominance_time(const MarketParams& p, const TwoLevelCap& cap);

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace capstop
