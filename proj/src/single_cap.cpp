#include "capstop/single_cap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "capstop/analytic.hpp"
#include "capstop/normal.hpp"
#include "capstop/quadrature.hpp"
#include "capstop/roots.hpp"

namespace capstop {

namespace {
constexpr double kTinyTime = 1e-12;

double boundary_root(const Boundary& b, double level, double lo, double hi) {
    // b is non-increasing and piecewise linear; locate b(t) = level on [lo, hi].
    return bisect_or_throw([&](double t) { return b.value_at(t) - level; }, lo, hi, 1e-8,
                           "cap crossing");
}
}  // namespace

double cap_cross_time(const Boundary& uncapped, const TwoLevelCap& cap) {
    const double t1 = cap.switch_time, t2 = cap.maturity;
    const double b_end = uncapped.value_at(t2);
    const double b_switch = uncapped.value_at(t1);
    if (b_end > cap.level2) return t2;
    if (b_switch >= cap.level2) return boundary_root(uncapped, cap.level2, t1, t2);
    if (b_switch > cap.level1) return t1;
    if (uncapped.value_at(0.0) > cap.level1) return boundary_root(uncapped, cap.level1, 0.0, t1);
    return 0.0;
}

SingleCapSolution::SingleCapSolution(std::shared_ptr<const UncappedSolution> uncapped,
                                     double cap_level, int slope_nodes, double eps_frac,
                                     int time_panels)
    : uncapped_(std::move(uncapped)),
      level_(cap_level),
      eps_frac_(eps_frac),
      time_panels_(time_panels),
      slope_grid_(0.0, uncapped_->maturity(), std::max(slope_nodes, 2)) {
    const MarketParams& p = params();
    if (!(level_ > p.strike))
        throw std::invalid_argument("SingleCapSolution: cap must exceed the strike");

    const Boundary& b = uncapped_->boundary();
    const double t2 = maturity();
    if (uncapped_->boundary_infinite() || b.value_at(t2) >= level_) {
        cross_ = t2;
    } else if (b.value_at(0.0) <= level_) {
        cross_ = 0.0;
    } else {
        cross_ = boundary_root(b, level_, 0.0, t2);
    }

    if (cross_ > kTinyTime && cross_ < t2 - kTinyTime) {
        const double wing = (10.0 + 2.0) * p.sigma * std::sqrt(t2);
        const double lo = level_ * std::exp(-wing);
        const UncappedSolution* unc = uncapped_.get();
        const double ts = cross_;
        price_at_cross_ = PriceCurve::tabulate(
            [unc, ts](double x) { return unc->price(x, ts); }, lo, level_, {p.strike}, 600);
    }

    // Left slope at the cap: exact 1 past the crossing, one-sided difference of
    // the hitting-time price (with a Richardson step-halving) before it.
    slope_values_.assign(slope_grid_.size(), 1.0);
    const double eps = eps_frac_ * level_;
    for (std::size_t i = 0; i < slope_grid_.size(); ++i) {
        const double t = slope_grid_.node(i);
        if (t >= cross_ || t >= t2 - kTinyTime) continue;
        const double d_full = (level_ - p.strike - price_via_hitting(level_ - eps, t)) / eps;
        const double d_half =
            (level_ - p.strike - price_via_hitting(level_ - 0.5 * eps, t)) / (0.5 * eps);
        slope_error_ = std::max(slope_error_, std::abs(d_half - d_full));
        slope_values_[i] = std::clamp(2.0 * d_half - d_full, 1e-12, 1.0);
    }
}

double SingleCapSolution::cap_slope(double t) const {
    if (t >= cross_) return 1.0;
    const std::size_t i = slope_grid_.segment_index(t);
    const double w = (t - slope_grid_.node(i)) / slope_grid_.spacing();
    return slope_values_[i] + (slope_values_[i + 1] - slope_values_[i]) * w;
}

double SingleCapSolution::price_via_hitting(double spot, double t) const {
    const MarketParams& p = params();
    const double t2 = maturity();
    if (spot >= level_) return level_ - p.strike;
    if (t >= t2 - kTinyTime) return std::max(std::min(spot, level_) - p.strike, 0.0);
    if (t >= cross_) return uncapped_->price(spot, t);
    if (cross_ >= t2 - kTinyTime) {
        // Boundary above the cap for the whole horizon: exercise is automatic at the cap.
        return auto_exercise_price(spot, t, level_, t2, p);
    }
    const double hit = discounted_hit_before(spot, level_, t, cross_, p);
    const double killed = killed_expectation(spot, level_, t, cross_, p, std::cref(price_at_cross_),
                                             std::array<double, 1>{p.strike});
    return (level_ - p.strike) * hit + killed;
}

double SingleCapSolution::local_time_term(double spot, double t) const {
    const MarketParams& p = params();
    const double t2 = maturity();
    const double mu = p.r - p.delta - 0.5 * p.sigma * p.sigma;
    const double w_end = std::sqrt(t2 - t);
    const auto integrand = [&](double w) {
        if (w < 1e-9) {
            return spot == level_ ? norm_pdf(0.0) * p.sigma * level_ : 0.0;
        }
        const double tau = w * w;
        const double z = -(std::log(level_ / spot) - mu * tau) / (p.sigma * w);
        return std::exp(-p.r * tau) * cap_slope(t + tau) * norm_pdf(z) * p.sigma * level_;
    };
    QuadratureOptions opt;
    opt.rel_tol = 1e-7;
    opt.abs_floor = 1e-12;
    return adaptive_simpson(integrand, 0.0, w_end, opt).value;
}

double SingleCapSolution::price_via_local_time(double spot, double t) const {
    const MarketParams& p = params();
    const double t2 = maturity();
    if (t >= t2 - kTinyTime) return std::max(std::min(spot, level_) - p.strike, 0.0);

    const double benchmark = european_capped_call(spot, t, level_, t2, p);

    const auto above_cap = [&](double u) {
        return std::exp(-p.r * (u - t)) * prob_above(spot, t, u, level_, p);
    };
    const double cap_term =
        p.r * (level_ - p.strike) * composite_simpson(above_cap, t, t2, time_panels_);

    double band_term = 0.0;
    if (!uncapped_->boundary_infinite() && cross_ < t2 - kTinyTime) {
        const Boundary& b = uncapped_->boundary();
        const auto band = [&](double u) {
            const double lo = b.value_at(std::min(u, t2));
            if (lo >= level_) return 0.0;
            return std::exp(-p.r * (u - t)) * waiting_benefit_between(spot, t, u, lo, level_, p);
        };
        band_term = composite_simpson(band, std::max(t, cross_), t2, time_panels_);
    }

    return benchmark + cap_term + band_term + local_time_term(spot, t);
}

double SingleCapSolution::price(double spot, double t) const {
    const MarketParams& p = params();
    if (t >= maturity() - kTinyTime) return std::max(std::min(spot, level_) - p.strike, 0.0);
    if (spot >= level_) return level_ - p.strike;
    if (!uncapped_->boundary_infinite() && spot >= uncapped_->boundary_at(t))
        return spot - p.strike;
    return price_via_local_time(spot, t);
}

Boundary SingleCapSolution::capped_boundary(double from, double to, int n_steps) const {
    TimeGrid g(from, to, n_steps);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        v[i] = std::min(uncapped_->boundary_at(g.node(i)), level_);
    return Boundary(g, std::move(v));
}

double verify_capped_boundary_equation(const SingleCapSolution& s, double from_time) {
    if (s.uncapped().boundary_infinite()) return 0.0;
    const double from = std::max(from_time, s.cap_cross_time());
    return s.uncapped().max_equation_residual(from, s.maturity());
}

}  // namespace capstop
