#include "capstop/two_level.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "capstop/analytic.hpp"
#include "capstop/normal.hpp"
#include "capstop/quadrature.hpp"
#include "capstop/roots.hpp"

namespace capstop {

namespace {

constexpr double kTinyTime = 1e-12;

double interp_linear(const TimeGrid& g, const std::vector<double>& v, double t) {
    if (t <= g.start()) return v.front();
    if (t >= g.end()) return v.back();
    const std::size_t i = g.segment_index(t);
    const double a = v[i], b = v[i + 1];
    if (std::isinf(a) || std::isinf(b)) {
        if (t == g.node(i)) return a;
        if (t == g.node(i + 1)) return b;
        return Boundary::infinite_value();
    }
    const double w = (t - g.node(i)) / g.spacing();
    return a + (b - a) * w;
}

}  // namespace

TwoLevelSolution TwoLevelSolution::solve(const MarketParams& p, const TwoLevelCap& cap,
                                         const TwoLevelConfig& cfg) {
    cap.validate(p);
    TwoLevelSolution s(p, cap, cfg);

    auto unc = std::make_shared<UncappedSolution>(
        UncappedSolution::solve(p, TimeGrid(0.0, cap.maturity, cfg.uncapped_steps)));
    s.unc_ = unc;
    s.cap2_ = std::make_shared<SingleCapSolution>(unc, cap.level2, cfg.slope_nodes, cfg.eps_frac,
                                                  cfg.time_panels);

    const double at_switch = unc->boundary_at(cap.switch_time);
    s.report_.case_label = classify_case(p, cap, at_switch);
    s.report_.uncapped = unc->boundary();
    s.report_.cap_cross_time = cap_cross_time(unc->boundary(), cap);
    s.report_.diagnostics.uncapped_max_residual =
        unc->boundary_infinite() ? 0.0 : unc->max_equation_residual(0.0, cap.maturity);

    // Post-switch boundary grid aligned with the uncapped nodes when possible.
    const double h_unc = unc->boundary().grid().spacing();
    const int n2 = std::max(1, static_cast<int>(std::round((cap.maturity - cap.switch_time) / h_unc)));
    s.report_.post_switch = s.cap2_->capped_boundary(cap.switch_time, cap.maturity, n2);

    switch (s.report_.case_label) {
        case CaseLabel::CaseI: s.solve_case_i(); break;
        case CaseLabel::CaseII: s.solve_case_ii(); break;
        case CaseLabel::CaseIII: s.solve_case_iii(); break;
        case CaseLabel::Degenerate: s.solve_degenerate(); break;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Waiting value and its boundary
// ---------------------------------------------------------------------------

double TwoLevelSolution::wait_value(double spot, double t) const {
    const double t1 = cap_.switch_time, t2 = cap_.maturity, level = cap_.level2;
    if (t >= t1) return cap2_->price_via_local_time(spot, t);

    const double benchmark = european_capped_call(spot, t, level, t2, p_);

    const auto above_cap = [&](double u) {
        return std::exp(-p_.r * (u - t)) * prob_above(spot, t, u, level, p_);
    };
    const double cap_term =
        p_.r * (level - p_.strike) * composite_simpson(above_cap, t1, t2, cfg_.time_panels);

    double band_term = 0.0;
    if (!unc_->boundary_infinite() && cap2_->cap_cross_time() < t2 - kTinyTime) {
        const double lo_time = std::max(t1, cap2_->cap_cross_time());
        const auto band = [&](double u) {
            const double lo = unc_->boundary_at(std::min(u, t2));
            if (lo >= level) return 0.0;
            return std::exp(-p_.r * (u - t)) * waiting_benefit_between(spot, t, u, lo, level, p_);
        };
        band_term = composite_simpson(band, lo_time, t2, cfg_.time_panels);
    }

    const double mu = p_.r - p_.delta - 0.5 * p_.sigma * p_.sigma;
    const auto kernel = [&](double w) {
        const double tau = w * w;
        const double z = -(std::log(level / spot) - mu * tau) / (p_.sigma * w);
        return std::exp(-p_.r * tau) * cap2_->cap_slope(t + tau) * norm_pdf(z) * p_.sigma * level;
    };
    QuadratureOptions kernel_opt;
    kernel_opt.rel_tol = 1e-7;
    kernel_opt.abs_floor = 1e-12;
    const double lt_term =
        adaptive_simpson(kernel, std::sqrt(t1 - t), std::sqrt(t2 - t), kernel_opt).value;

    return benchmark + cap_term + band_term + lt_term;
}

void TwoLevelSolution::solve_wait_boundary() {
    const double level1 = cap_.level1;
    const double target = level1 - p_.strike;
    TimeGrid grid(0.0, cap_.switch_time, cfg_.pre_switch_steps);
    std::vector<double> values(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const auto f = [&](double x) { return wait_value(x, t) - target; };
        double hi = 2.0 * std::max(cap_.level1, cap_.level2);
        double fhi = f(hi);
        while (fhi < 0.0 && hi < 1e7 * p_.strike) {
            hi *= 2.0;
            fhi = f(hi);
        }
        if (fhi < 0.0) {
            values[i] = Boundary::infinite_value();
            continue;
        }
        const double lo = 1e-3 * p_.strike;
        const double flo = f(lo);
        values[i] = flo >= 0.0 ? lo : bisect(f, lo, hi, flo, fhi, 1e-8 * p_.strike);
    }
    wait_boundary_ = Boundary(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// Shared premium machinery
// ---------------------------------------------------------------------------

double TwoLevelSolution::upper_at(double v) const {
    return interp_linear(*pre_grid_, work_values_, v);
}

double TwoLevelSolution::upper_slope_at(double v) const {
    return interp_linear(*pre_grid_, upper_slope_values_, v);
}

double TwoLevelSolution::l1_slope_at(double v) const {
    return interp_linear(*pre_grid_, l1_slope_values_, v);
}

double TwoLevelSolution::band_premium(double spot, double t) const {
    const double level1 = cap_.level1;
    const double horizon = induction_horizon_;
    if (horizon - t <= kTinyTime) return 0.0;
    const double mu = p_.r - p_.delta - 0.5 * p_.sigma * p_.sigma;
    const double sig = p_.sigma;
    const double w_end = std::sqrt(horizon - t);

    const auto occupancy = [&](double w) {
        const double tau = w * w;
        const double v = std::min(t + tau, horizon);
        const double disc = std::exp(-p_.r * tau);
        if (w < 1e-9) return 0.0;
        const double upper = upper_at(v);
        double occ = p_.r * (level1 - p_.strike) * prob_between(spot, t, v, level1, upper, p_);
        if (std::isinf(upper))
            occ = p_.r * (level1 - p_.strike) * prob_above(spot, t, v, level1, p_);
        double sub = 0.0;
        if (include_sub_band_) {
            const double b = unc_->boundary_at(std::min(v, unc_->maturity()));
            if (b < level1) sub = waiting_benefit_between(spot, t, v, b, level1, p_);
        }
        return 2.0 * w * disc * (occ + sub);
    };
    double total = composite_simpson(occupancy, 0.0, w_end, cfg_.time_panels);

    // Local-time kernels carry a narrow peak at w ~ |log(level/spot)| / sigma,
    // so they get their own adaptive passes.
    QuadratureOptions kernel_opt;
    kernel_opt.rel_tol = 1e-7;
    kernel_opt.abs_floor = 1e-12;

    const auto lower_kernel = [&](double w) {
        const double tau = w * w;
        const double v = std::min(t + tau, horizon);
        const double disc = std::exp(-p_.r * tau);
        if (w < 1e-9)
            return spot == level1 ? disc * lower_slope_fn_(v) * norm_pdf(0.0) * sig * level1 : 0.0;
        const double zl = -(std::log(level1 / spot) - mu * tau) / (sig * w);
        return disc * lower_slope_fn_(v) * norm_pdf(zl) * sig * level1;
    };
    total += adaptive_simpson(lower_kernel, 0.0, w_end, kernel_opt).value;

    if (!cfg_.assume_smooth_fit) {
        const auto upper_kernel = [&](double w) {
            const double tau = w * w;
            const double v = std::min(t + tau, horizon);
            const double disc = std::exp(-p_.r * tau);
            const double upper = upper_at(v);
            if (!std::isfinite(upper)) return 0.0;
            if (w < 1e-9)
                return spot == upper ? -disc * upper_slope_at(v) * norm_pdf(0.0) * sig * upper : 0.0;
            const double zb = -(std::log(upper / spot) - mu * tau) / (sig * w);
            return -disc * upper_slope_at(v) * norm_pdf(zb) * sig * upper;
        };
        total += adaptive_simpson(upper_kernel, 0.0, w_end, kernel_opt).value;
    }
    return total;
}

double TwoLevelSolution::decreasing_premium(double spot, double t) const {
    const double level1 = cap_.level1;
    const double horizon = cap_.switch_time;
    if (horizon - t <= kTinyTime) return 0.0;
    const double mu = p_.r - p_.delta - 0.5 * p_.sigma * p_.sigma;
    const double sig = p_.sigma;
    const double w_end = std::sqrt(horizon - t);

    const auto occupancy = [&](double w) {
        const double tau = w * w;
        const double v = std::min(t + tau, horizon);
        const double disc = std::exp(-p_.r * tau);
        if (w < 1e-9) return 0.0;
        const double upper = upper_at(v);
        double sub = 0.0;
        if (upper < level1) sub = waiting_benefit_between(spot, t, v, upper, level1, p_);
        const double occ = p_.r * (level1 - p_.strike) * prob_above(spot, t, v, level1, p_);
        return 2.0 * w * disc * (sub + occ);
    };
    double total = composite_simpson(occupancy, 0.0, w_end, cfg_.time_panels);

    QuadratureOptions kernel_opt;
    kernel_opt.rel_tol = 1e-7;
    kernel_opt.abs_floor = 1e-12;
    const auto kernel = [&](double w) {
        const double tau = w * w;
        const double v = std::min(t + tau, horizon);
        const double disc = std::exp(-p_.r * tau);
        if (w < 1e-9)
            return spot == level1 ? disc * l1_slope_at(v) * norm_pdf(0.0) * sig * level1 : 0.0;
        const double zl = -(std::log(level1 / spot) - mu * tau) / (sig * w);
        return disc * l1_slope_at(v) * norm_pdf(zl) * sig * level1;
    };
    total += adaptive_simpson(kernel, 0.0, w_end, kernel_opt).value;
    return total;
}

double TwoLevelSolution::discounted_terminal(double spot, double t, double T,
                                             const PriceCurve& payoff) const {
    const double tau = T - t;
    if (tau <= kTinyTime) return payoff(spot);
    const double sd = p_.sigma * std::sqrt(tau);
    const double center = std::log(spot) + (p_.r - p_.delta - 0.5 * p_.sigma * p_.sigma) * tau;
    double y_lo = center - 10.0 * sd, y_hi = center + 10.0 * sd;

    std::vector<double> edges{y_lo};
    for (double x : payoff.segment_edges()) {
        const double y = std::log(x);
        if (y > y_lo && y < y_hi) edges.push_back(y);
    }
    edges.push_back(y_hi);
    std::sort(edges.begin(), edges.end());

    const auto integrand = [&](double y) {
        return payoff(std::exp(y)) * norm_pdf((y - center) / sd) / sd;
    };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        total += integrate_or_throw(integrand, edges[k], edges[k + 1]);
    return std::exp(-p_.r * tau) * total;
}

// ---------------------------------------------------------------------------
// Case I
// ---------------------------------------------------------------------------

double TwoLevelSolution::hit_or_wait_value(double spot, double t) const {
    const double level1 = cap_.level1;
    if (spot == level1) return level1 - p_.strike;
    const double horizon = hit_horizon_;
    const bool case_two = report_.case_label == CaseLabel::CaseII;
    if (t >= horizon - kTinyTime) {
        if (case_two) return std::max(std::min(spot, cap_.level2) - p_.strike, 0.0);
        return wait_value(spot, t);
    }
    const double hit = discounted_hit_before(spot, level1, t, horizon, p_);
    double killed;
    if (case_two) {
        // Terminal payoff (x ∧ level2 - K)+ in closed form.
        const double disc = std::exp(-p_.r * (horizon - t));
        const double lo = std::max(p_.strike, spot < level1 ? 0.0 : level1);
        const double hi_cap = spot < level1 ? std::min(level1, cap_.level2) : cap_.level2;
        double v = killed_interval_first_moment(spot, level1, t, horizon, lo, hi_cap, p_) -
                   p_.strike * killed_interval_mass(spot, level1, t, horizon, lo, hi_cap, p_);
        if (spot > level1)
            v += (cap_.level2 - p_.strike) *
                 killed_interval_mass(spot, level1, t, horizon, cap_.level2,
                                      std::numeric_limits<double>::infinity(), p_);
        killed = disc * std::max(0.0, v);
    } else {
        killed = killed_expectation(spot, level1, t, horizon, p_, std::cref(wait_at_band_close_),
                                    std::array<double, 2>{p_.strike, cap_.level2});
    }
    return (level1 - p_.strike) * hit + killed;
}

double TwoLevelSolution::below_band_value(double spot, double t) const {
    const double level1 = cap_.level1;
    const double horizon = induction_horizon_;
    if (spot >= level1) return level1 - p_.strike;
    if (t >= horizon - kTinyTime) return terminal_curve_(spot);
    const double hit = discounted_hit_before(spot, level1, t, horizon, p_);
    const double killed = killed_expectation(spot, level1, t, horizon, p_,
                                             std::cref(terminal_curve_),
                                             std::array<double, 1>{p_.strike});
    return (level1 - p_.strike) * hit + killed;
}

double TwoLevelSolution::eep_price(double spot, double t) const {
    return discounted_terminal(spot, t, induction_horizon_, terminal_curve_) +
           band_premium(spot, t);
}

void TwoLevelSolution::induct_band_boundary(double slope_at_horizon) {
    const TimeGrid& grid = *pre_grid_;
    const double level1 = cap_.level1;
    const double target = level1 - p_.strike;
    const double horizon = induction_horizon_;
    const double t0 = report_.dominance_time.value_or(-1.0);
    const double x_tol = 1e-10 * p_.strike;
    const double res_tol = 1e-6 * p_.strike;
    const double eps = cfg_.eps_frac * p_.strike;

    work_values_.assign(grid.size(), level1);
    upper_slope_values_.assign(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.node(i) >= horizon - 1e-12) {
            upper_slope_values_[i] = slope_at_horizon;
            break;
        }
    }

    auto& diag = report_.diagnostics;
    diag.boundary_slopes.assign(grid.size(), 0.0);
    std::ptrdiff_t start = -1;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid.node(i) < horizon - 1e-12) start = static_cast<std::ptrdiff_t>(i);

    // The boundary equation is implicit in the price slope at the boundary.
    // Each pass solves the boundary with the slope curve frozen, then
    // re-estimates the slopes along the solved boundary; the estimates settle
    // in two to three passes (they stay near zero, consistent with smooth fit).
    const int passes = cfg_.assume_smooth_fit ? 1 : 3;
    std::vector<double> new_slopes;
    for (int pass = 0; pass < passes; ++pass) {
        new_slopes = upper_slope_values_;
        diag.pre_switch_residuals.clear();
        diag.pre_switch_max_residual = 0.0;

        for (std::ptrdiff_t i = start; i >= 0; --i) {
            const auto iu = static_cast<std::size_t>(i);
            const double t = grid.node(iu);
            if (t <= t0) {
                work_values_[iu] = Boundary::infinite_value();
                new_slopes[iu] = 0.0;
                continue;
            }

            const auto value_at = [&](double x, double s) {
                work_values_[iu] = x;
                return discounted_terminal(s, t, horizon, terminal_curve_) + band_premium(s, t);
            };
            const auto f = [&](double x) { return value_at(x, x) - target; };

            const double lo = level1 * (1.0 + 1e-12);
            const double flo = f(lo);
            if (flo >= 0.0) {
                work_values_[iu] = level1;
                new_slopes[iu] = new_slopes[iu + 1];
                if (pass + 1 == passes)
                    diag.notes.push_back("band boundary collapsed to the cap at node " +
                                         std::to_string(iu) + " (t=" + std::to_string(t) + ")");
                continue;
            }

            double hi;
            if (wait_boundary_) {
                const double bw = wait_boundary_->value_at(t);
                hi = std::isfinite(bw) ? bw : 4.0 * std::max(cap_.level1, cap_.level2);
            } else {
                hi = 4.0 * std::max(cap_.level1, cap_.level2);
            }
            if (std::isfinite(work_values_[iu + 1])) hi = std::max(hi, 1.5 * work_values_[iu + 1]);
            double fhi = f(hi);
            while (fhi < 0.0 && hi < 1e7 * p_.strike) {
                hi *= 2.0;
                fhi = f(hi);
            }
            if (fhi < 0.0) {
                // No finite root reachable: the boundary has blown up at this node.
                work_values_[iu] = Boundary::infinite_value();
                new_slopes[iu] = 0.0;
                continue;
            }

            const double x = bisect(f, lo, hi, flo, fhi, x_tol);
            work_values_[iu] = x;
            const double res = f(x);
            diag.pre_switch_residuals.push_back({t, res, std::abs(res) > res_tol});
            diag.pre_switch_max_residual = std::max(diag.pre_switch_max_residual, std::abs(res));

            if (!cfg_.assume_smooth_fit) {
                const double d_full = (value_at(x, x + eps) - target) / eps;
                const double d_half = (value_at(x, x + 0.5 * eps) - target) / (0.5 * eps);
                const double raw_slope = 2.0 * d_half - d_full;
                diag.boundary_slopes[iu] = raw_slope;
                new_slopes[iu] = std::clamp(raw_slope, -0.5, 1.5);
            }

            if (pass + 1 == passes && std::isfinite(work_values_[iu + 1]) &&
                std::abs(x - work_values_[iu + 1]) > 10.0 * grid.spacing() * p_.strike) {
                diag.notes.push_back("adjacent-node jump above 10*h*K at node " +
                                     std::to_string(iu) + " (t=" + std::to_string(t) + ")");
            }
        }
        upper_slope_values_ = new_slopes;
    }
}

Boundary TwoLevelSolution::finish_pre_switch_boundary() {
    return Boundary(*pre_grid_, work_values_);
}

void TwoLevelSolution::solve_case_i() {
    const double level1 = cap_.level1;
    const double t1cap = cap_.switch_time;
    const double target = level1 - p_.strike;
    report_.dominance_time = dominance_time(p_, cap_);

    solve_wait_boundary();

    // Band close time: largest root of wait_value(level1, .) = level1 - K.
    const TimeGrid& wgrid = wait_boundary_->grid();
    const auto gap = [&](double t) { return wait_value(level1, t) - target; };
    double band_close = 0.0;
    bool found = false;
    double prev_t = t1cap;
    double prev_g = gap(t1cap);  // > 0 in Case I
    for (std::size_t k = wgrid.size() - 1; k-- > 0;) {
        const double t = wgrid.node(k);
        const double g = gap(t);
        if (g <= 0.0) {
            band_close = g == 0.0 ? t : bisect(gap, t, prev_t, g, prev_g, 1e-9);
            found = true;
            break;
        }
        prev_t = t;
        prev_g = g;
    }
    report_.band_close_time = found ? band_close : 0.0;
    hit_horizon_ = band_close;

    if (!found || band_close < 32.0 * t1cap / cfg_.pre_switch_steps) {
        // Exercise set degenerates to (at most) a point; nothing to solve.
        report_.band_open_time = 0.0;
        report_.band_close_time = found ? band_close : 0.0;
        return;
    }

    const double wing = 12.0 * p_.sigma * std::sqrt(cap_.maturity);
    wait_at_band_close_ = PriceCurve::tabulate(
        [&](double x) { return wait_value(x, band_close); }, level1 * std::exp(-wing),
        level1 * std::exp(wing), {cap_.level2}, cfg_.curve_points);

    // Band open time: walking backward from the band close time, the first
    // time the hit-or-wait value at level1+eps drops to the payoff.
    const double eps1 = cfg_.eps_frac * level1;
    const auto slope_gap = [&](double t) {
        return hit_or_wait_value(level1 + eps1, t) - target;
    };
    double band_open = 0.0;
    {
        const TimeGrid scan(0.0, band_close, cfg_.pre_switch_steps);
        double pt = band_close, pg = slope_gap(band_close);
        bool crossed = false;
        for (std::size_t k = scan.size() - 1; k-- > 0;) {
            const double t = scan.node(k);
            const double g = slope_gap(t);
            if (g <= 0.0) {
                band_open = g == 0.0 ? t : bisect(slope_gap, t, pt, g, pg, 1e-9);
                crossed = true;
                break;
            }
            pt = t;
            pg = g;
        }
        if (!crossed) band_open = 0.0;
    }
    if (report_.dominance_time) band_open = std::max(band_open, *report_.dominance_time);
    report_.band_open_time = band_open;
    induction_horizon_ = band_open;

    if (band_open <= kTinyTime) {
        // The band never opens; the pre-switch exercise set is the cap line.
        TimeGrid grid(0.0, band_close, cfg_.pre_switch_steps);
        pre_grid_ = grid;
        work_values_.assign(grid.size(), level1);
        report_.pre_switch = finish_pre_switch_boundary();
        return;
    }

    terminal_curve_ = PriceCurve::tabulate(
        [&](double x) { return hit_or_wait_value(x, band_open); }, level1 * std::exp(-wing),
        level1 * std::exp(wing), {level1}, cfg_.curve_points);

    // Left slope of the value at the first cap on [0, band_open).
    {
        const int n = std::max(2, static_cast<int>(std::round(
                             band_open / (t1cap / cfg_.pre_switch_steps))));
        TimeGrid sg(0.0, band_open, n);
        lower_slope_grid_ = sg;
        lower_slope_values_.assign(sg.size(), 0.0);
        for (std::size_t i = 0; i < sg.size(); ++i) {
            const double t = sg.node(i);
            const double d_full = (target - below_band_value(level1 - eps1, t)) / eps1;
            const double d_half =
                (target - below_band_value(level1 - 0.5 * eps1, t)) / (0.5 * eps1);
            lower_slope_values_[i] = std::clamp(2.0 * d_half - d_full, 1e-12, 1.0);
        }
        lower_slope_fn_ = [this](double v) {
            if (v >= lower_slope_grid_->end()) return lower_slope_values_.back();
            return interp_linear(*lower_slope_grid_, lower_slope_values_, v);
        };
    }

    const double slope_at_horizon =
        (hit_or_wait_value(level1 + eps1, band_open) - target) / eps1;

    pre_grid_ = TimeGrid(0.0, band_close, cfg_.pre_switch_steps);
    include_sub_band_ = false;
    induct_band_boundary(slope_at_horizon);
    report_.pre_switch = finish_pre_switch_boundary();
}

// ---------------------------------------------------------------------------
// Case II
// ---------------------------------------------------------------------------

void TwoLevelSolution::solve_case_ii() {
    const double level1 = cap_.level1;
    const double t1cap = cap_.switch_time;
    const double target = level1 - p_.strike;
    report_.dominance_time = dominance_time(p_, cap_);
    hit_horizon_ = t1cap;

    cap1_ = std::make_shared<SingleCapSolution>(unc_, level1, cfg_.slope_nodes, cfg_.eps_frac,
                                                cfg_.time_panels);
    solve_wait_boundary();

    // Band open time: largest zero of the price slope at level1+.
    const double eps1 = cfg_.eps_frac * level1;
    const auto slope_gap = [&](double t) {
        return hit_or_wait_value(level1 + eps1, t) - target;
    };
    double band_open = 0.0;
    {
        const TimeGrid scan(0.0, t1cap, cfg_.pre_switch_steps);
        double pt = scan.node(scan.size() - 2);
        double pg = slope_gap(pt);
        bool crossed = pg <= 0.0;
        if (crossed) band_open = pt;
        if (!crossed) {
            for (std::size_t k = scan.size() - 2; k-- > 0;) {
                const double t = scan.node(k);
                const double g = slope_gap(t);
                if (g <= 0.0) {
                    band_open = g == 0.0 ? t : bisect(slope_gap, t, pt, g, pg, 1e-9);
                    crossed = true;
                    break;
                }
                pt = t;
                pg = g;
            }
        }
        if (!crossed) band_open = 0.0;
    }
    if (report_.dominance_time) band_open = std::max(band_open, *report_.dominance_time);
    report_.band_open_time = band_open;
    induction_horizon_ = band_open;

    pre_grid_ = TimeGrid(0.0, t1cap, cfg_.pre_switch_steps);
    if (band_open <= kTinyTime) {
        work_values_.assign(pre_grid_->size(), level1);
        report_.pre_switch = finish_pre_switch_boundary();
        return;
    }

    const double wing = 12.0 * p_.sigma * std::sqrt(cap_.maturity);
    const SingleCapSolution* c1 = cap1_.get();
    terminal_curve_ = PriceCurve::tabulate(
        [&, c1](double x) {
            return x <= level1 ? c1->price(x, band_open) : hit_or_wait_value(x, band_open);
        },
        level1 * std::exp(-wing), level1 * std::exp(wing), {p_.strike, level1, cap_.level2},
        cfg_.curve_points);

    lower_slope_fn_ = [c1](double v) { return c1->cap_slope(v); };
    const double slope_at_horizon =
        (hit_or_wait_value(level1 + eps1, band_open) - target) / eps1;

    include_sub_band_ = true;
    induct_band_boundary(slope_at_horizon);
    report_.pre_switch = finish_pre_switch_boundary();
}

// ---------------------------------------------------------------------------
// Case III
// ---------------------------------------------------------------------------

double TwoLevelSolution::case_iii_terminal_value(double spot, double t) const {
    const double t1cap = cap_.switch_time;
    const double thr = case3_threshold_;
    const double level1 = cap_.level1;
    const double tau = t1cap - t;
    if (tau <= kTinyTime) {
        if (spot >= thr) return std::min(spot, level1) - p_.strike;
        return terminal_curve_(spot);
    }
    // Continuation part below the threshold via the tabulated curve; the
    // exercised payoff above it in closed form.
    const double sd = p_.sigma * std::sqrt(tau);
    const double center = std::log(spot) + (p_.r - p_.delta - 0.5 * p_.sigma * p_.sigma) * tau;
    const double y_lo = center - 10.0 * sd;
    const double y_hi = std::min(center + 10.0 * sd, std::log(thr));
    double cont = 0.0;
    if (y_hi > y_lo) {
        const auto integrand = [&](double y) {
            return terminal_curve_(std::exp(y)) * norm_pdf((y - center) / sd) / sd;
        };
        cont = integrate_or_throw(integrand, y_lo, y_hi);
    }
    const double exercised = partial_first_moment(spot, t, t1cap, thr, level1, p_) -
                             p_.strike * prob_between(spot, t, t1cap, thr, level1, p_) +
                             (level1 - p_.strike) * prob_above(spot, t, t1cap, level1, p_);
    return std::exp(-p_.r * tau) * (cont + exercised);
}

double TwoLevelSolution::eep_price_case_iii(double spot, double t) const {
    return case_iii_terminal_value(spot, t) + decreasing_premium(spot, t);
}

void TwoLevelSolution::induct_decreasing_boundary(double end_value) {
    const TimeGrid& grid = *pre_grid_;
    const double level1 = cap_.level1;
    const double x_tol = 1e-10 * p_.strike;
    const double res_tol = 1e-6 * p_.strike;
    const double eps1 = cfg_.eps_frac * level1;
    auto& diag = report_.diagnostics;

    const std::size_t n = grid.size() - 1;
    work_values_.assign(grid.size(), level1);
    l1_slope_values_.assign(grid.size(), 1.0);
    work_values_[n] = std::min(end_value, level1);

    const auto estimate_l1_slope = [&](std::size_t i) {
        const double t = grid.node(i);
        const double d_full = (level1 - p_.strike - eep_price_case_iii(level1 - eps1, t)) / eps1;
        const double d_half =
            (level1 - p_.strike - eep_price_case_iii(level1 - 0.5 * eps1, t)) / (0.5 * eps1);
        return std::clamp(2.0 * d_half - d_full, 1e-12, 1.0);
    };

    if (work_values_[n] >= level1) l1_slope_values_[n] = estimate_l1_slope(n);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = n - 1 - k;
        const double t = grid.node(i);
        const double prev = work_values_[i + 1];
        l1_slope_values_[i] = l1_slope_values_[i + 1];

        if (prev >= level1) {
            work_values_[i] = level1;
            l1_slope_values_[i] = estimate_l1_slope(i);
            continue;
        }

        const auto f = [&](double x) {
            work_values_[i] = x;
            return x - p_.strike - eep_price_case_iii(x, t);
        };

        const double flo = f(prev);
        if (flo > 100.0 * res_tol)
            throw SolverError("decreasing boundary: monotonicity violation at node " +
                              std::to_string(i) + " (t=" + std::to_string(t) +
                              "); the grid is too coarse");
        double x;
        if (flo >= 0.0) {
            x = prev;  // flat within quadrature noise
        } else {
            const double hi = level1 * (1.0 - 1e-12);
            const double fhi = f(hi);
            x = fhi <= 0.0 ? level1 : bisect(f, prev, hi, flo, fhi, x_tol);
        }
        work_values_[i] = x;

        if (x >= level1 * (1.0 - 1e-10)) {
            work_values_[i] = level1;
            l1_slope_values_[i] = estimate_l1_slope(i);
        } else {
            l1_slope_values_[i] = 1.0;
            const double res = f(x);
            diag.pre_switch_residuals.push_back({t, res, std::abs(res) > res_tol});
            diag.pre_switch_max_residual = std::max(diag.pre_switch_max_residual, std::abs(res));
        }
    }

    // The slope curve below the cap-touch time is implicit in itself (the
    // estimates feed the kernel term); refine with the boundary frozen.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> refined = l1_slope_values_;
        for (std::size_t k = 0; k <= n; ++k) {
            const std::size_t i = n - k;
            if (work_values_[i] >= level1) refined[i] = estimate_l1_slope(i);
        }
        l1_slope_values_ = refined;
    }
}

void TwoLevelSolution::solve_case_iii() {
    const double t1cap = cap_.switch_time;
    const double level1 = cap_.level1;
    const double b_switch = unc_->boundary_at(t1cap);
    const double thr = std::min(cap_.level2, b_switch);
    case3_threshold_ = thr;
    hit_horizon_ = t1cap;

    const double wing = 12.0 * p_.sigma * std::sqrt(cap_.maturity);
    terminal_curve_ = PriceCurve::tabulate(
        [&](double x) { return cap2_->price(x, t1cap); }, thr * std::exp(-wing), thr,
        {p_.strike}, cfg_.curve_points);

    const double floor_level =
        p_.delta > 0.0 ? p_.r * p_.strike / p_.delta : Boundary::infinite_value();
    const double end_value = std::max(floor_level, thr);

    pre_grid_ = TimeGrid(0.0, t1cap, cfg_.pre_switch_steps);
    induct_decreasing_boundary(end_value);
    report_.pre_switch = finish_pre_switch_boundary();

    // Last time the boundary sits at the first cap.
    const TimeGrid& grid = *pre_grid_;
    std::ptrdiff_t first_below = -1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (work_values_[i] < level1) {
            first_below = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (first_below < 0) {
        report_.cap_touch_time = t1cap;
    } else if (first_below == 0) {
        report_.cap_touch_time = 0.0;
    } else {
        const auto j = static_cast<std::size_t>(first_below);
        const double xj = work_values_[j];
        const double slope = (work_values_[j + 1] - xj) / grid.spacing();
        double cross = grid.node(j);
        if (slope < -1e-12) cross = grid.node(j) + (level1 - xj) / slope;
        report_.cap_touch_time = std::clamp(cross, grid.node(j - 1), grid.node(j));
    }
}

// ---------------------------------------------------------------------------
// Degenerate cap
// ---------------------------------------------------------------------------

void TwoLevelSolution::solve_degenerate() {
    pre_grid_ = TimeGrid(0.0, cap_.switch_time, cfg_.pre_switch_steps);
    work_values_.resize(pre_grid_->size());
    for (std::size_t i = 0; i < pre_grid_->size(); ++i)
        work_values_[i] = std::min(unc_->boundary_at(pre_grid_->node(i)), cap_.level2);
    report_.pre_switch = finish_pre_switch_boundary();
}

// ---------------------------------------------------------------------------
// Price dispatch
// ---------------------------------------------------------------------------

double TwoLevelSolution::price(double spot, double t) const {
    const double level1 = cap_.level1, level2 = cap_.level2;
    const double t1cap = cap_.switch_time, t2 = cap_.maturity;
    if (t >= t2 - kTinyTime) {
        const double cap_end = level2;
        return std::max(std::min(spot, cap_end) - p_.strike, 0.0);
    }

    switch (report_.case_label) {
        case CaseLabel::Degenerate:
            return cap2_->price(spot, t);

        case CaseLabel::CaseI: {
            if (t >= t1cap) return cap2_->price(spot, t);
            const double band_close = report_.band_close_time.value_or(0.0);
            if (t > band_close) return wait_value(spot, t);
            const double band_open = report_.band_open_time.value_or(0.0);
            if (t >= band_open) return hit_or_wait_value(spot, t);
            if (report_.dominance_time && t <= *report_.dominance_time && spot >= level1)
                return level1 - p_.strike;
            if (spot < level1) return below_band_value(spot, t);
            if (report_.pre_switch && spot <= report_.pre_switch->value_at(t))
                return level1 - p_.strike;
            return eep_price(spot, t);
        }

        case CaseLabel::CaseII: {
            if (t >= t1cap) return cap2_->price(spot, t);
            if (spot <= level1) return cap1_->price(spot, t);
            const double band_open = report_.band_open_time.value_or(0.0);
            if (t >= band_open) return hit_or_wait_value(spot, t);
            if (report_.dominance_time && t <= *report_.dominance_time) return level1 - p_.strike;
            if (report_.pre_switch && spot <= report_.pre_switch->value_at(t))
                return level1 - p_.strike;
            return eep_price(spot, t);
        }

        case CaseLabel::CaseIII: {
            if (t > t1cap + kTinyTime) return cap2_->price(spot, t);
            if (std::abs(t - t1cap) <= kTinyTime) {
                if (spot >= case3_threshold_) return std::min(spot, level1) - p_.strike;
                return cap2_->price(spot, t1cap);
            }
            if (spot >= level1) return level1 - p_.strike;
            if (report_.pre_switch && spot >= report_.pre_switch->value_at(t))
                return spot - p_.strike;
            return eep_price_case_iii(spot, t);
        }
    }
    return 0.0;
}

}  // namespace capstop
