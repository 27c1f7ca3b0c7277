#include "capstop/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "capstop/normal.hpp"
#include "capstop/quadrature.hpp"

namespace capstop {

namespace {
constexpr double kTinyTime = 1e-12;

double drift(const MarketParams& p) { return p.r - p.delta - 0.5 * p.sigma * p.sigma; }
}  // namespace

double european_call(double spot, double t, double strike, double maturity,
                     const MarketParams& p) {
    const double tau = maturity - t;
    if (spot <= 0.0) return 0.0;
    if (tau <= kTinyTime) return std::max(spot - strike, 0.0);
    if (strike <= 0.0) return spot * std::exp(-p.delta * tau);
    const double sig = p.sigma * std::sqrt(tau);
    const double d1 = (std::log(spot / strike) + (p.r - p.delta + 0.5 * p.sigma * p.sigma) * tau) / sig;
    const double d2 = d1 - sig;
    return spot * std::exp(-p.delta * tau) * norm_cdf(d1) -
           strike * std::exp(-p.r * tau) * norm_cdf(d2);
}

double european_capped_call(double spot, double t, double cap_level, double maturity,
                            const MarketParams& p) {
    if (!(cap_level > p.strike))
        throw std::invalid_argument("european_capped_call: cap must exceed the strike");
    return european_call(spot, t, p.strike, maturity, p) -
           european_call(spot, t, cap_level, maturity, p);
}

double prob_above(double spot, double t, double u, double level, const MarketParams& p) {
    const double tau = u - t;
    if (level <= 0.0) return 1.0;
    if (spot <= 0.0) return 0.0;
    if (tau <= kTinyTime) return spot >= level ? 1.0 : 0.0;
    const double sig = p.sigma * std::sqrt(tau);
    return norm_cdf((std::log(spot / level) + drift(p) * tau) / sig);
}

double prob_between(double spot, double t, double u, double lo, double hi,
                    const MarketParams& p) {
    if (!(hi > lo)) return 0.0;
    return std::max(0.0, prob_above(spot, t, u, lo, p) - prob_above(spot, t, u, hi, p));
}

double partial_first_moment(double spot, double t, double u, double lo, double hi,
                            const MarketParams& p) {
    if (!(hi > lo) || spot <= 0.0) return 0.0;
    const double tau = u - t;
    if (tau <= kTinyTime) return (spot >= lo && spot <= hi) ? spot : 0.0;
    const double sig = p.sigma * std::sqrt(tau);
    const double shift = (p.r - p.delta + 0.5 * p.sigma * p.sigma) * tau;
    const auto d1 = [&](double x) { return (std::log(spot / x) + shift) / sig; };
    const double hi_part = std::isinf(hi) ? 0.0 : norm_cdf(d1(hi));
    return spot * std::exp((p.r - p.delta) * tau) * std::max(0.0, norm_cdf(d1(lo)) - hi_part);
}

double waiting_benefit_between(double spot, double t, double u, double lo, double hi,
                               const MarketParams& p) {
    if (!(hi > lo)) return 0.0;
    return p.delta * partial_first_moment(spot, t, u, lo, hi, p) -
           p.r * p.strike * prob_between(spot, t, u, lo, hi, p);
}

HittingParams HittingParams::make(double spot, double level, const MarketParams& p) {
    HittingParams h;
    h.lambda = spot / level;
    h.b = -(p.r - p.delta - 0.5 * p.sigma * p.sigma);
    h.f = std::sqrt(h.b * h.b + 2.0 * p.r * p.sigma * p.sigma);
    h.phi = 0.5 * (h.b - h.f);
    h.alpha = 0.5 * (h.b + h.f);
    return h;
}

double discounted_hit_before(double spot, double level, double t, double T,
                             const MarketParams& p) {
    if (spot == level) return 1.0;
    const double tau = T - t;
    if (tau <= kTinyTime || spot <= 0.0) return 0.0;
    const HittingParams h = HittingParams::make(spot, level, p);
    const double lg = std::log(h.lambda);
    const double sig = p.sigma * std::sqrt(tau);
    const double s2 = p.sigma * p.sigma;
    double d0 = (lg - h.f * tau) / sig;
    double shift = 2.0 * h.f * std::sqrt(tau) / p.sigma;
    if (spot > level) {
        d0 = -d0;
        shift = -shift;
    }
    // Each term is in (0, 1]; evaluate in log space so the power and the tail
    // cdf cannot overflow/underflow against each other.
    const double e1 = (2.0 * h.phi / s2) * lg + log_norm_cdf(d0);
    const double e2 = (2.0 * h.alpha / s2) * lg + log_norm_cdf(d0 + shift);
    return std::min(1.0, std::exp(std::min(e1, 0.0)) + std::exp(std::min(e2, 0.0)));
}

namespace {

struct KilledCoeffs {
    double lg;        // log(spot/level)
    double sig;       // sigma*sqrt(tau)
    double btau;      // b*tau with b = -(r-delta-sigma^2/2)
    double mirror_q;  // 1 - 2(r-delta)/sigma^2
    double level;
    double spot;

    double d_minus(double x) const { return (-lg + std::log(x / level) + btau) / sig; }
    double d_plus(double x) const { return (lg + std::log(x / level) + btau) / sig; }
};

KilledCoeffs killed_coeffs(double spot, double level, double tau, const MarketParams& p) {
    KilledCoeffs c;
    c.lg = std::log(spot / level);
    c.sig = p.sigma * std::sqrt(tau);
    c.btau = -(p.r - p.delta - 0.5 * p.sigma * p.sigma) * tau;
    c.mirror_q = 1.0 - 2.0 * (p.r - p.delta) / (p.sigma * p.sigma);
    c.level = level;
    c.spot = spot;
    return c;
}

double cdf_diff(double hi, double lo) { return std::max(0.0, norm_cdf(hi) - norm_cdf(lo)); }

}  // namespace

double killed_density(double x, double spot, double level, double t, double T,
                      const MarketParams& p) {
    const double tau = T - t;
    if (x <= 0.0 || tau <= kTinyTime) return 0.0;
    const KilledCoeffs c = killed_coeffs(spot, level, tau, p);
    const double dm = c.d_minus(x), dp = c.d_plus(x);
    const double mirror = std::exp(c.mirror_q * c.lg - 0.5 * dp * dp) * kInvSqrt2Pi;
    return std::max(0.0, norm_pdf(dm) - mirror) / (x * c.sig);
}

double killed_interval_mass(double spot, double level, double t, double T, double a, double b,
                            const MarketParams& p) {
    if (!(b > a)) return 0.0;
    const double tau = T - t;
    if (tau <= kTinyTime) return (spot >= a && spot <= b) ? 1.0 : 0.0;
    const KilledCoeffs c = killed_coeffs(spot, level, tau, p);
    const double direct = cdf_diff(c.d_minus(b), c.d_minus(a));
    const double mirrored = cdf_diff(c.d_plus(b), c.d_plus(a));
    double mirror_term = 0.0;
    if (mirrored > 0.0) mirror_term = std::exp(c.mirror_q * c.lg + std::log(mirrored));
    return std::max(0.0, direct - mirror_term);
}

double killed_interval_first_moment(double spot, double level, double t, double T, double a,
                                    double b, const MarketParams& p) {
    if (!(b > a)) return 0.0;
    const double tau = T - t;
    if (tau <= kTinyTime) return (spot >= a && spot <= b) ? spot : 0.0;
    const KilledCoeffs c = killed_coeffs(spot, level, tau, p);
    const double growth = std::exp((p.r - p.delta) * tau);
    const double direct = cdf_diff(c.d_minus(b) - c.sig, c.d_minus(a) - c.sig);
    const double mirrored = cdf_diff(c.d_plus(b) - c.sig, c.d_plus(a) - c.sig);
    double mirror_term = 0.0;
    if (mirrored > 0.0)
        mirror_term = (level * level / spot) * std::exp(c.mirror_q * c.lg + std::log(mirrored));
    return std::max(0.0, growth * (spot * direct - mirror_term));
}

double killed_expectation(double spot, double level, double t, double T, const MarketParams& p,
                          const std::function<double(double)>& payoff,
                          std::span<const double> breakpoints) {
    if (spot == level) return 0.0;
    const double tau = T - t;
    if (tau <= kTinyTime) return payoff(spot);

    const double center = std::log(spot) + drift(p) * tau;
    const double wing = 10.0 * p.sigma * std::sqrt(tau);
    double y_lo, y_hi;
    if (spot < level) {
        y_lo = center - wing;
        y_hi = std::log(level);
    } else {
        y_lo = std::log(level);
        y_hi = center + wing;
    }
    if (!(y_hi > y_lo)) return 0.0;

    std::vector<double> edges{y_lo};
    for (double b : breakpoints) {
        if (b <= 0.0) continue;
        const double yb = std::log(b);
        if (yb > y_lo && yb < y_hi) edges.push_back(yb);
    }
    edges.push_back(y_hi);
    std::sort(edges.begin(), edges.end());

    const auto integrand = [&](double y) {
        const double x = std::exp(y);
        return payoff(x) * killed_density(x, spot, level, t, T, p) * x;
    };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        total += integrate_or_throw(integrand, edges[k], edges[k + 1]);
    return std::exp(-p.r * tau) * total;
}

double expected_local_time_weight(double spot, double level, double t, double u,
                                  const MarketParams& p) {
    const double tau = u - t;
    if (tau <= 0.0 || spot <= 0.0) return 0.0;
    const double sqt = std::sqrt(tau);
    const double z = -(std::log(level / spot) - drift(p) * tau) / (p.sigma * sqt);
    const double w = norm_pdf(z) * p.sigma * level / sqt;
    return w < 1e-300 ? 0.0 : w;
}

double auto_exercise_price(double spot, double t, double cap_level, double maturity,
                           const MarketParams& p) {
    if (spot >= cap_level) return cap_level - p.strike;
    const double tau = maturity - t;
    if (tau <= kTinyTime) return std::max(std::min(spot, cap_level) - p.strike, 0.0);
    const double hit = discounted_hit_before(spot, cap_level, t, maturity, p);
    const double moment =
        killed_interval_first_moment(spot, cap_level, t, maturity, p.strike, cap_level, p);
    const double mass = killed_interval_mass(spot, cap_level, t, maturity, p.strike, cap_level, p);
    return (cap_level - p.strike) * hit + std::exp(-p.r * tau) * (moment - p.strike * mass);
}

}  // namespace capstop
