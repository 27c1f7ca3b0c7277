#include "capstop/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace capstop {

PriceCurve PriceCurve::tabulate(const std::function<double(double)>& f, double lo, double hi,
                                const std::vector<double>& interior_breakpoints,
                                int points_per_segment) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("PriceCurve: need 0 < lo < hi");
    if (points_per_segment < 4) points_per_segment = 4;

    std::vector<double> edges{lo};
    for (double b : interior_breakpoints)
        if (b > lo * (1.0 + 1e-12) && b < hi * (1.0 - 1e-12)) edges.push_back(b);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());

    PriceCurve c;
    c.x_lo_ = lo;
    c.x_hi_ = hi;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        Segment s;
        s.y_lo = std::log(edges[k]);
        s.y_hi = std::log(edges[k + 1]);
        const int n = points_per_segment;
        s.dy = (s.y_hi - s.y_lo) / n;
        s.values.resize(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            const double x = i == n ? edges[k + 1] : std::exp(s.y_lo + s.dy * i);
            s.values[static_cast<std::size_t>(i)] = f(x);
        }
        c.segments_.push_back(std::move(s));
    }
    c.flat_lo_ = c.segments_.front().values.front();
    c.flat_hi_ = c.segments_.back().values.back();
    return c;
}

std::vector<double> PriceCurve::segment_edges() const {
    std::vector<double> edges;
    edges.reserve(segments_.size() + 1);
    edges.push_back(x_lo_);
    for (std::size_t k = 0; k + 1 < segments_.size(); ++k) edges.push_back(std::exp(segments_[k].y_hi));
    edges.push_back(x_hi_);
    return edges;
}

double PriceCurve::operator()(double x) const {
    if (segments_.empty()) throw std::logic_error("PriceCurve: empty");
    if (x <= x_lo_) return flat_lo_;
    if (x >= x_hi_) return flat_hi_;
    const double y = std::log(x);
    std::size_t k = 0;
    while (k + 1 < segments_.size() && y > segments_[k].y_hi) ++k;
    const Segment& s = segments_[k];
    const auto n = static_cast<std::ptrdiff_t>(s.values.size()) - 1;
    double u = (y - s.y_lo) / s.dy;
    auto i = static_cast<std::ptrdiff_t>(std::floor(u));
    i = std::clamp<std::ptrdiff_t>(i, 0, n - 1);
    const double t = u - static_cast<double>(i);
    const double p0 = s.values[static_cast<std::size_t>(std::max<std::ptrdiff_t>(i - 1, 0))];
    const double p1 = s.values[static_cast<std::size_t>(i)];
    const double p2 = s.values[static_cast<std::size_t>(i + 1)];
    const double p3 = s.values[static_cast<std::size_t>(std::min<std::ptrdiff_t>(i + 2, n))];
    // Catmull-Rom in the log coordinate.
    return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

}  // namespace capstop
