#pragma once

#include <cmath>

namespace capstop {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kSqrt2 = 1.4142135623730950488016887;

/// Standard normal density.
inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard normal cdf via erfc; absolute error well below 1e-12.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

/// log(norm_cdf(x)), stable in the far left tail where the cdf underflows.
inline double log_norm_cdf(double x) {
    if (x > -36.0) return std::log(norm_cdf(x));
    // Asymptotic expansion of Mills' ratio for x -> -inf.
    const double x2 = x * x;
    return -0.5 * x2 - std::log(-x / kInvSqrt2Pi) + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace capstop
