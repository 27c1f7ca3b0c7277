#include "capstop/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace capstop {

namespace {

struct LatticeLayout {
    int total_steps;
    int switch_layer;  ///< layer index landing on the switch date; -1 if none
    double dt;
};

LatticeLayout make_layout(double t, const TwoLevelCap& cap, const LatticeConfig& cfg) {
    LatticeLayout lay{};
    if (t >= cap.switch_time || !cfg.snap_switch) {
        lay.total_steps = std::max(1, cfg.n_steps);
        lay.dt = (cap.maturity - t) / lay.total_steps;
        lay.switch_layer = -1;
        if (t < cap.switch_time) {
            const double k = (cap.switch_time - t) / lay.dt;
            if (std::abs(k - std::round(k)) < 1e-9) lay.switch_layer = static_cast<int>(std::round(k));
        }
        return lay;
    }
    const double ratio = (cap.switch_time - t) / (cap.maturity - t);
    const int m = std::max(1, static_cast<int>(std::round(cfg.n_steps * ratio)));
    lay.dt = (cap.switch_time - t) / m;
    const int after = std::max(1, static_cast<int>(std::round((cap.maturity - cap.switch_time) / lay.dt)));
    lay.total_steps = m + after;
    lay.switch_layer = m;
    return lay;
}

class LatticeEngine {
public:
    LatticeEngine(double spot, double t, const MarketParams& p, const TwoLevelCap& cap,
                  const LatticeConfig& cfg)
        : spot_(spot), p_(p), cap_(cap), cfg_(cfg), lay_(make_layout(t, cap, cfg)) {
        up_ = std::exp(p.sigma * std::sqrt(lay_.dt));
        down_ = 1.0 / up_;
        const double growth = std::exp((p.r - p.delta) * lay_.dt);
        prob_up_ = (growth - down_) / (up_ - down_);
        if (!(prob_up_ > 0.0) || !(prob_up_ < 1.0))
            throw SolverError("lattice: risk-neutral step probability outside (0,1); "
                              "increase n_steps (got p=" + std::to_string(prob_up_) + ")");
        disc_ = std::exp(-p.r * lay_.dt);
        t_ = t;
    }

    double cap_at_layer(int i) const {
        if (lay_.switch_layer < 0) return t_ >= cap_.switch_time ? cap_.level2 : cap_at_time(t_ + i * lay_.dt);
        if (i < lay_.switch_layer) return cap_.level1;
        if (i > lay_.switch_layer) return cap_.level2;
        return cap_.continuity == CapContinuity::LeftContinuous ? cap_.level1 : cap_.level2;
    }

    template <typename LayerHook>
    double run(LayerHook&& hook) const {
        const int n = lay_.total_steps;
        std::vector<double> value(static_cast<std::size_t>(n) + 1);
        std::vector<double> node_spot(static_cast<std::size_t>(n) + 1);

        double low = spot_;
        for (int i = 0; i < n; ++i) low *= down_;
        {
            const double cap_T = cap_.level2;
            double s = low;
            const double up2 = up_ * up_;
            for (int j = 0; j <= n; ++j) {
                node_spot[static_cast<std::size_t>(j)] = s;
                value[static_cast<std::size_t>(j)] =
                    std::max(std::min(s, cap_T) - p_.strike, 0.0);
                s *= up2;
            }
            hook(n, node_spot, value, value);
        }

        std::vector<double> payoff(static_cast<std::size_t>(n) + 1);
        for (int i = n - 1; i >= 0; --i) {
            low *= up_;
            const double cap_i = cap_at_layer(i);
            const bool can_exercise =
                cfg_.american && layer_time(i) >= cfg_.no_exercise_before - 1e-12;
            const double up2 = up_ * up_;
            double s = low;
            for (int j = 0; j <= i; ++j) {
                const double cont =
                    disc_ * (prob_up_ * value[static_cast<std::size_t>(j) + 1] +
                             (1.0 - prob_up_) * value[static_cast<std::size_t>(j)]);
                const double ex = std::max(std::min(s, cap_i) - p_.strike, 0.0);
                node_spot[static_cast<std::size_t>(j)] = s;
                payoff[static_cast<std::size_t>(j)] = ex;
                value[static_cast<std::size_t>(j)] = can_exercise ? std::max(cont, ex) : cont;
                s *= up2;
            }
            hook(i, node_spot, value, payoff);
        }
        return value[0];
    }

    double layer_time(int i) const { return t_ + i * lay_.dt; }
    int total_steps() const { return lay_.total_steps; }

private:
    double cap_at_time(double u) const {
        if (cap_.continuity == CapContinuity::LeftContinuous)
            return u <= cap_.switch_time ? cap_.level1 : cap_.level2;
        return u < cap_.switch_time ? cap_.level1 : cap_.level2;
    }

    double spot_, prob_up_, up_, down_, disc_, t_;
    MarketParams p_;
    TwoLevelCap cap_;
    LatticeConfig cfg_;
    LatticeLayout lay_;
};

}  // namespace

double lattice_price(double spot, double t, const MarketParams& p, const TwoLevelCap& cap,
                     const LatticeConfig& cfg) {
    cap.validate(p);
    if (!(t < cap.maturity)) throw std::invalid_argument("lattice_price: need t < maturity");
    LatticeEngine engine(spot, t, p, cap, cfg);
    return engine.run([](int, const std::vector<double>&, const std::vector<double>&,
                         const std::vector<double>&) {});
}

FrontierEstimate lattice_frontier(double spot, double t, const MarketParams& p,
                                  const TwoLevelCap& cap, const LatticeConfig& cfg) {
    cap.validate(p);
    if (!(t < cap.maturity)) throw std::invalid_argument("lattice_frontier: need t < maturity");
    LatticeEngine engine(spot, t, p, cap, cfg);

    FrontierEstimate out;
    out.layers.assign(static_cast<std::size_t>(engine.total_steps()) + 1, FrontierLayer{});

    const double tol = 1e-12 * p.strike;
    out.price = engine.run([&](int layer, const std::vector<double>& node_spot,
                               const std::vector<double>& value, const std::vector<double>& payoff) {
        FrontierLayer& L = out.layers[static_cast<std::size_t>(layer)];
        L.time = engine.layer_time(layer);
        int runs = 0;
        bool in_run = false;
        int first_lo = -1, first_hi = -1;
        const int top = layer;
        for (int j = 0; j <= top; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const bool ex = payoff[ju] > 0.0 && payoff[ju] >= value[ju] - tol;
            if (ex && !in_run) {
                ++runs;
                in_run = true;
                if (runs == 1) first_lo = j;
            }
            if (ex && runs == 1) first_hi = j;
            if (!ex) in_run = false;
        }
        if (runs > 0) {
            L.any = true;
            L.lo = node_spot[static_cast<std::size_t>(first_lo)];
            L.hi = node_spot[static_cast<std::size_t>(first_hi)];
            L.ray = (first_hi == top) && in_run;
            L.anomalous = runs > 1;
        }
    });
    return out;
}

}  // namespace capstop
