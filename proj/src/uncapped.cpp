#include "capstop/uncapped.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "capstop/analytic.hpp"
#include "capstop/normal.hpp"
#include "capstop/roots.hpp"

namespace capstop {

namespace {

constexpr double kTinyTime = 1e-12;

/// e^{-r tau} E[(delta S_u - r K) 1{S_u >= level}], the discounted benefit of
/// being exercised above the boundary. At tau -> 0 with spot on the boundary
/// the indicator carries half mass.
double exercised_benefit(double spot, double level, double tau, const MarketParams& p) {
    if (std::isinf(level)) return 0.0;
    if (tau <= kTinyTime) {
        if (spot > level) return p.delta * spot - p.r * p.strike;
        if (spot < level) return 0.0;
        return 0.5 * (p.delta * spot - p.r * p.strike);
    }
    const double sig = p.sigma * std::sqrt(tau);
    const double d1 = (std::log(spot / level) + (p.r - p.delta + 0.5 * p.sigma * p.sigma) * tau) / sig;
    const double d2 = d1 - sig;
    return p.delta * spot * std::exp(-p.delta * tau) * norm_cdf(d1) -
           p.r * p.strike * std::exp(-p.r * tau) * norm_cdf(d2);
}

}  // namespace

UncappedSolution UncappedSolution::solve(const MarketParams& p, const TimeGrid& grid) {
    if (std::abs(grid.start()) > 1e-12)
        throw std::invalid_argument("UncappedSolution: grid must start at 0");
    const std::size_t n = grid.size();

    if (p.delta == 0.0) {
        std::vector<double> inf_values(n, Boundary::infinite_value());
        return UncappedSolution(p, Boundary(grid, std::move(inf_values)), true);
    }

    std::vector<double> values(n);
    const double terminal = std::max(p.strike, p.r * p.strike / p.delta);
    values[n - 1] = terminal;

    const double h = grid.spacing();
    const double maturity = grid.end();

    // Trapezoid weights over the already-solved nodes u >= t_i.
    const auto equation = [&](double x, std::size_t i) {
        const double t = grid.node(i);
        double integral = 0.5 * exercised_benefit(x, x, 0.0, p);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = (j == n - 1) ? 0.5 : 1.0;
            integral += w * exercised_benefit(x, values[j], grid.node(j) - t, p);
        }
        integral *= h;
        return x - p.strike - european_call(x, t, p.strike, maturity, p) - integral;
    };

    const double x_tol = 1e-10 * p.strike;
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t i = n - 1 - k;
        const double lo = values[i + 1];
        const double flo = equation(lo, i);
        if (flo >= 0.0) {
            values[i] = lo;  // boundary flat across this step
            continue;
        }
        double hi = 10.0 * terminal;
        double fhi = equation(hi, i);
        while (fhi < 0.0 && hi < 1e6 * p.strike) {
            hi *= 2.0;
            fhi = equation(hi, i);
        }
        if (fhi < 0.0)
            throw SolverError("uncapped boundary: no root at node " + std::to_string(i) +
                              " (t=" + std::to_string(grid.node(i)) + "), last bracket [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        values[i] = bisect([&](double x) { return equation(x, i); }, lo, hi, flo, fhi, x_tol);
    }

    return UncappedSolution(p, Boundary(grid, std::move(values)), false);
}

double UncappedSolution::premium_on_nodes(double spot, std::size_t first_node) const {
    const TimeGrid& g = boundary_.grid();
    const double t = g.node(first_node);
    double integral = 0.5 * exercised_benefit(spot, boundary_.values()[first_node], 0.0, params_);
    const std::size_t n = g.size();
    for (std::size_t j = first_node + 1; j < n; ++j) {
        const double w = (j == n - 1) ? 0.5 : 1.0;
        integral += w * exercised_benefit(spot, boundary_.values()[j], g.node(j) - t, params_);
    }
    return integral * g.spacing();
}

double UncappedSolution::premium(double spot, double t) const {
    if (infinite_) return 0.0;
    const TimeGrid& g = boundary_.grid();
    if (t >= g.end()) return 0.0;
    const double span = g.end() - t;
    const int m = std::max(1, static_cast<int>(std::ceil(span / g.spacing())));
    const double h = span / m;
    double integral = 0.5 * exercised_benefit(spot, boundary_.value_at(t), 0.0, params_);
    for (int j = 1; j <= m; ++j) {
        const double u = (j == m) ? g.end() : t + h * j;
        const double w = (j == m) ? 0.5 : 1.0;
        integral += w * exercised_benefit(spot, boundary_.value_at(u), u - t, params_);
    }
    return integral * h;
}

double UncappedSolution::price(double spot, double t) const {
    return european_call(spot, t, params_.strike, maturity(), params_) + premium(spot, t);
}

double UncappedSolution::equation_residual(std::size_t node) const {
    if (infinite_) return 0.0;
    const double x = boundary_.values()[node];
    const double t = boundary_.grid().node(node);
    return x - params_.strike - european_call(x, t, params_.strike, maturity(), params_) -
           premium_on_nodes(x, node);
}

double UncappedSolution::max_equation_residual(double from, double to) const {
    double worst = 0.0;
    const TimeGrid& g = boundary_.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g.node(i);
        if (t < from - 1e-12 || t > to + 1e-12) continue;
        worst = std::max(worst, std::abs(equation_residual(i)));
    }
    return worst;
}

}  // namespace capstop
