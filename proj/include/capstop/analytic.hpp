#pragma once

#include <functional>
#include <span>

#include "capstop/types.hpp"

namespace capstop {

/// Black-Scholes call with continuous dividend yield; t >= maturity returns the payoff.
double european_call(double spot, double t, double strike, double maturity,
                     const MarketParams& p);

/// European call with payoff (S ∧ cap - K)+ = (S-K)+ - (S-cap)+ for cap > K.
double european_capped_call(double spot, double t, double cap_level, double maturity,
                            const MarketParams& p);

/// P(S_u >= level | S_t = spot) under the risk-neutral lognormal marginal.
double prob_above(double spot, double t, double u, double level, const MarketParams& p);

/// P(lo <= S_u <= hi | S_t = spot); zero when hi <= lo.
double prob_between(double spot, double t, double u, double lo, double hi,
                    const MarketParams& p);

/// E[S_u 1{lo <= S_u <= hi} | S_t = spot]; zero when hi <= lo.
double partial_first_moment(double spot, double t, double u, double lo, double hi,
                            const MarketParams& p);

/// E[(delta*S_u - r*K) 1{lo <= S_u <= hi}]: the net benefit of holding the
/// exercised position over the band.
double waiting_benefit_between(double spot, double t, double u, double lo, double hi,
                               const MarketParams& p);

/// Coefficients of the discounted first-hitting-time transform of a constant level.
struct HittingParams {
    double lambda;  ///< spot / level
    double b;       ///< -(r - delta - sigma^2/2)
    double f;       ///< sqrt(b^2 + 2 r sigma^2)
    double phi;     ///< (b - f)/2, <= 0
    double alpha;   ///< (b + f)/2, >= 0 when r > 0

    static HittingParams make(double spot, double level, const MarketParams& p);
};

/// E[e^{-r(tau_L - t)} 1{tau_L < T}] for the first hitting time of the level;
/// equals 1 at spot == level and 0 when no time remains.
double discounted_hit_before(double spot, double level, double t, double T,
                             const MarketParams& p);

/// Sub-density of S_T at x on the no-hit event {tau_level >= T}, valid on the
/// side of the level containing the spot.
double killed_density(double x, double spot, double level, double t, double T,
                      const MarketParams& p);

/// Closed-form integrals of the killed sub-density over [a, b] (a, b on the
/// spot's side of the level): plain mass and first moment in x.
double killed_interval_mass(double spot, double level, double t, double T, double a, double b,
                            const MarketParams& p);
double killed_interval_first_moment(double spot, double level, double t, double T, double a,
                                    double b, const MarketParams& p);

/// E[e^{-r(tau_L ∧ T - t)} G(S_T) 1{tau_L >= T}] by adaptive quadrature on the
/// log-price axis (tails cut at 10 standard deviations). Splits at the given
/// payoff breakpoints. Throws QuadratureError when the tolerance is not met.
double killed_expectation(double spot, double level, double t, double T, const MarketParams& p,
                          const std::function<double(double)>& payoff,
                          std::span<const double> breakpoints = {});

/// Density in u of the expected local time the price accrues at the level:
/// phi(.) * sigma * level / sqrt(u - t). Weights below 1e-300 flush to zero.
double expected_local_time_weight(double spot, double level, double t, double u,
                                  const MarketParams& p);

/// Price of the capped call with automatic exercise at the cap: pays cap - K
/// at the first hitting time, else the capped payoff at maturity.
double auto_exercise_price(double spot, double t, double cap_level, double maturity,
                           const MarketParams& p);

}  // namespace capstop
