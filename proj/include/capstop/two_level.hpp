#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "capstop/curve.hpp"
#include "capstop/single_cap.hpp"
#include "capstop/types.hpp"
#include "capstop/uncapped.hpp"

namespace capstop {

struct TwoLevelConfig {
    int uncapped_steps = 400;    ///< grid on [0, maturity] for the uncapped boundary
    int pre_switch_steps = 200;  ///< grid for the pre-switch boundary and time scans
    int slope_nodes = 400;       ///< cap-slope curve resolution on [0, maturity)
    int time_panels = 128;       ///< Simpson panels for the time integrals
    int curve_points = 700;      ///< tabulation density per price-curve segment
    bool assume_smooth_fit = false;  ///< drop the boundary local-time term in the premium
    double eps_frac = 1e-4;          ///< one-sided difference step, relative
};

/// Full two-level-cap solve: classification, structural times, pre-switch
/// boundary by backward induction on the case's recursive integral equation,
/// and the early-exercise-premium price anywhere on [0, maturity].
class TwoLevelSolution {
public:
    static TwoLevelSolution solve(const MarketParams& p, const TwoLevelCap& cap,
                                  const TwoLevelConfig& cfg = {});

    const MarketParams& params() const { return p_; }
    const TwoLevelCap& cap() const { return cap_; }
    const TwoLevelConfig& config() const { return cfg_; }
    CaseLabel case_label() const { return report_.case_label; }
    const SolveReport& report() const { return report_; }

    const UncappedSolution& uncapped() const { return *unc_; }
    const SingleCapSolution& post_switch_cap() const { return *cap2_; }
    const SingleCapSolution* first_cap() const { return cap1_.get(); }  ///< Case II only

    /// Price of the two-level contract anywhere on [0, maturity].
    double price(double spot, double t) const;

    /// Value of waiting until the switch date before exercising.
    double wait_value(double spot, double t) const;

    /// Value of exercising at the first hit of the first cap before the
    /// horizon (Case I: band close time; Case II: switch date), else
    /// continuing optimally. Exact payoff at spot == level1.
    double hit_or_wait_value(double spot, double t) const;

    /// Pre-switch value below the first cap before the band-open time (Case I).
    double below_band_value(double spot, double t) const;

    /// Case I/II EEP price before the band-open time; Case III counterpart.
    double eep_price(double spot, double t) const;
    double eep_price_case_iii(double spot, double t) const;

    /// Root in S of wait_value = level1 - K per node, infinite where none
    /// exists. Solved in Cases I and II.
    const std::optional<Boundary>& wait_boundary() const { return wait_boundary_; }

private:
    TwoLevelSolution(const MarketParams& p, const TwoLevelCap& cap, const TwoLevelConfig& cfg)
        : p_(p), cap_(cap), cfg_(cfg) {}

    void solve_case_i();
    void solve_case_ii();
    void solve_case_iii();
    void solve_degenerate();

    void solve_wait_boundary();  ///< wait_boundary_ and the band close time scan
    void induct_band_boundary(double slope_at_horizon);
    void induct_decreasing_boundary(double end_value);
    Boundary finish_pre_switch_boundary();

    double band_premium(double spot, double t) const;        // Cases I/II
    double decreasing_premium(double spot, double t) const;  // Case III
    double discounted_terminal(double spot, double t, double T, const PriceCurve& payoff) const;
    double case_iii_terminal_value(double spot, double t) const;  // C^{E,L} of Case III

    double upper_at(double v) const;
    double upper_slope_at(double v) const;
    double l1_slope_at(double v) const;

    MarketParams p_;
    TwoLevelCap cap_;
    TwoLevelConfig cfg_;
    SolveReport report_;

    std::shared_ptr<const UncappedSolution> unc_;
    std::shared_ptr<SingleCapSolution> cap2_;  ///< constant cap level2 on [0, maturity]
    std::shared_ptr<SingleCapSolution> cap1_;  ///< constant cap level1 (Case II)

    std::optional<Boundary> wait_boundary_;
    PriceCurve wait_at_band_close_;  ///< wait_value(., band close time) (Case I)
    PriceCurve terminal_curve_;      ///< payoff at the induction horizon (T0; Case III: continuation part)
    std::optional<TimeGrid> lower_slope_grid_;
    std::vector<double> lower_slope_values_;  ///< C_S(level1-, t) on [0, T0) (Case I)
    std::function<double(double)> lower_slope_fn_;

    std::optional<TimeGrid> pre_grid_;        ///< pre-switch boundary grid
    std::vector<double> work_values_;         ///< boundary values under construction
    std::vector<double> upper_slope_values_;  ///< C_S(boundary+, t) per node (Cases I/II)
    std::vector<double> l1_slope_values_;     ///< C_S(level1-, t) per node (Case III)
    double induction_horizon_ = 0.0;
    double hit_horizon_ = 0.0;  ///< hit_or_wait_value horizon (t1 in Case I, T1 in Case II)
    bool include_sub_band_ = false;
    double case3_threshold_ = 0.0;  ///< min(level2, uncapped boundary at the switch)
};

inline double price_two_level(double spot, double t, const TwoLevelSolution& s) {
    return s.price(spot, t);
}

}  // namespace capstop
