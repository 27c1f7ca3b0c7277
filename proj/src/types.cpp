#include "capstop/types.hpp"

#include <algorithm>
#include <cmath>

namespace capstop {

const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::CaseI: return "CaseI";
        case CaseLabel::CaseII: return "CaseII";
        case CaseLabel::CaseIII: return "CaseIII";
        case CaseLabel::Degenerate: return "Degenerate";
    }
    return "?";
}

TimeGrid::TimeGrid(double t_start, double t_end, int n_steps)
    : t_start_(t_start), t_end_(t_end), n_(n_steps) {
    if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be positive");
    h_ = (t_end - t_start) / static_cast<double>(n_steps);
    tol_ = 1e-9 * std::max(1.0, std::abs(t_end));
}

std::size_t TimeGrid::segment_index(double t) const {
    if (t <= t_start_) return 0;
    auto i = static_cast<std::ptrdiff_t>(std::floor((t - t_start_) / h_));
    i = std::clamp<std::ptrdiff_t>(i, 0, n_ - 1);
    // floor can land one segment high at representation edges
    if (node(static_cast<std::size_t>(i)) > t && i > 0) --i;
    return static_cast<std::size_t>(i);
}

Boundary::Boundary(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("Boundary: value count must match grid size");
    for (double v : values_) {
        if (std::isnan(v) || (!std::isinf(v) && !(v > 0.0)))
            throw std::invalid_argument("Boundary: finite values must be positive");
    }
}

double Boundary::value_at(double t) const {
    if (!grid_.contains(t))
        throw std::out_of_range("Boundary: query time outside the boundary domain");
    const std::size_t i = grid_.segment_index(t);
    // Exact node queries echo the stored value bit-for-bit.
    if (t == grid_.node(i)) return values_[i];
    if (t == grid_.node(i + 1)) return values_[i + 1];
    const double a = values_[i], b = values_[i + 1];
    if (std::isinf(a) || std::isinf(b)) return infinite_value();
    const double w = (t - grid_.node(i)) / grid_.spacing();
    return a + (b - a) * w;
}

bool Boundary::all_infinite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isinf(v); });
}

bool Boundary::any_infinite() const {
    return std::any_of(values_.begin(), values_.end(), [](double v) { return std::isinf(v); });
}

CaseLabel classify_case(const MarketParams& p, const TwoLevelCap& cap, double uncapped_at_switch) {
    cap.validate(p);
    if (cap.level1 == cap.level2) return CaseLabel::Degenerate;
    if (cap.level1 > cap.level2) return CaseLabel::CaseIII;
    if (cap.level1 < std::min(cap.level2, uncapped_at_switch)) return CaseLabel::CaseI;
    return CaseLabel::CaseII;
}

std::optional<double> dominance_time(const MarketParams& p, const TwoLevelCap& cap) {
    if (cap.level1 > cap.level2)
        throw std::invalid_argument("dominance_time: requires level1 <= level2");
    const double t0 =
        cap.switch_time - std::log((cap.level2 - p.strike) / (cap.level1 - p.strike)) / p.r;
    if (t0 < 0.0) return std::nullopt;
    return t0;
}

}  // namespace capstop
