#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "capstop/types.hpp"

namespace capstop {

/// Bisection on a bracketing interval [lo, hi] with f(lo), f(hi) of opposite
/// sign (either endpoint may be exactly zero). Returns the midpoint of the
/// final bracket of width <= x_tol.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double flo,
                     double fhi, double x_tol) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    for (int i = 0; i < 200 && hi - lo > x_tol; ++i) {
        const double m = 0.5 * (lo + hi);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

/// Bisection that evaluates the endpoints itself; nullopt when they do not bracket.
inline std::optional<double> try_bisect(const std::function<double(double)>& f, double lo,
                                        double hi, double x_tol) {
    const double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) return std::nullopt;
    return bisect(f, lo, hi, flo, fhi, x_tol);
}

/// Bisection that throws SolverError naming the searched interval on failure.
inline double bisect_or_throw(const std::function<double(double)>& f, double lo, double hi,
                              double x_tol, const std::string& context) {
    if (auto r = try_bisect(f, lo, hi, x_tol)) return *r;
    throw SolverError(context + ": no sign change on bracket [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
}

}  // namespace capstop
