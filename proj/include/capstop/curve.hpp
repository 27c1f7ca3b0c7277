#pragma once

#include <functional>
#include <vector>

namespace capstop {

/// Tabulated function of the asset price on [lo, hi], stored on log-spaced
/// nodes per segment and interpolated with a local cubic in log-price.
/// Segment edges are placed on the caller's breakpoints so payoff kinks never
/// sit inside an interpolation stencil. Queries outside [lo, hi] return the
/// edge value (the tabulated payoffs are asymptotically flat in both tails).
class PriceCurve {
public:
    PriceCurve() = default;

    static PriceCurve tabulate(const std::function<double(double)>& f, double lo, double hi,
                               const std::vector<double>& interior_breakpoints,
                               int points_per_segment);

    double operator()(double x) const;

    double lo() const { return x_lo_; }
    double hi() const { return x_hi_; }
    bool empty() const { return segments_.empty(); }

    /// Price values at the segment joints (including both outer edges).
    std::vector<double> segment_edges() const;

private:
    struct Segment {
        double y_lo, y_hi, dy;
        std::vector<double> values;
    };
    std::vector<Segment> segments_;
    double x_lo_ = 0.0, x_hi_ = 0.0;
    double flat_lo_ = 0.0, flat_hi_ = 0.0;
};

}  // namespace capstop
