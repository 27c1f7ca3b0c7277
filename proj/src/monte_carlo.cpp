#include "capstop/monte_carlo.hpp"

#include <cmath>
#include <future>
#include <thread>
#include <vector>

namespace capstop {

namespace {

constexpr int kChunks = 64;
constexpr double kTwoPi = 6.2831853071795864769;

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256** seeded via splitmix64; plus Box-Muller normals. Hand-rolled so
/// seeded runs are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0, 1].
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = kTwoPi * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct Accumulator {
    double sum = 0.0, sum_sq = 0.0;
    void add(double x) {
        sum += x;
        sum_sq += x * x;
    }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    McEstimate estimate(long long n) const {
        McEstimate e;
        e.mean = sum / static_cast<double>(n);
        const double var =
            std::max(0.0, sum_sq / static_cast<double>(n) - e.mean * e.mean);
        e.std_error = std::sqrt(var / static_cast<double>(n - 1));
        return e;
    }
};

template <typename PathFn>
void run_chunked(const McConfig& cfg, std::vector<Accumulator>& hit_acc,
                 std::vector<Accumulator>& killed_acc, PathFn path_fn) {
    hit_acc.assign(kChunks, {});
    killed_acc.assign(kChunks, {});
    const long long per_chunk = cfg.n_paths / kChunks;
    const long long remainder = cfg.n_paths % kChunks;

    const auto worker = [&](int chunk) {
        std::uint64_t sm = cfg.seed ^ (0xA0761D6478BD642Full * static_cast<std::uint64_t>(chunk + 1));
        Rng rng(splitmix64(sm));
        const long long n = per_chunk + (chunk < remainder ? 1 : 0);
        for (long long k = 0; k < n; ++k) path_fn(rng, hit_acc[chunk], killed_acc[chunk]);
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (hw == 1) {
        for (int c = 0; c < kChunks; ++c) worker(c);
        return;
    }
    std::vector<std::future<void>> futs;
    futs.reserve(kChunks);
    for (int c = 0; c < kChunks; ++c)
        futs.push_back(std::async(std::launch::async | std::launch::deferred, worker, c));
    for (auto& f : futs) f.get();
}

}  // namespace

HitKilledEstimate mc_hitting_expectations(double spot, double level, double t, double T,
                                          const MarketParams& p,
                                          const std::function<double(double)>& payoff,
                                          const McConfig& cfg) {
    if (cfg.n_paths < 2) throw std::invalid_argument("mc_hitting_expectations: need n_paths >= 2");
    const double tau = T - t;
    const double dt = tau / cfg.n_steps;
    const double mu_dt = (p.r - p.delta - 0.5 * p.sigma * p.sigma) * dt;
    const double sig_dt = p.sigma * std::sqrt(dt);
    const double sig2dt = p.sigma * p.sigma * dt;
    const double y = std::log(level);
    const double x0 = std::log(spot);
    const bool barrier_above = spot < level;
    const double disc_T = std::exp(-p.r * tau);

    HitKilledEstimate out;
    if (spot == level) {
        out.hit = {1.0, 0.0};
        out.killed = {0.0, 0.0};
        return out;
    }

    std::vector<Accumulator> hit_acc, killed_acc;
    run_chunked(cfg, hit_acc, killed_acc, [&](Rng& rng, Accumulator& ha, Accumulator& ka) {
        double x = x0;
        int crossed_step = -1;
        for (int i = 0; i < cfg.n_steps; ++i) {
            const double xn = x + mu_dt + sig_dt * rng.normal();
            const double a = barrier_above ? y - x : x - y;
            const double b = barrier_above ? y - xn : xn - y;
            bool crossed = b <= 0.0;
            if (!crossed) {
                // Brownian-bridge probability of touching the barrier inside the step.
                const double pc = std::exp(-2.0 * a * b / sig2dt);
                crossed = rng.uniform() <= pc;
            }
            if (crossed) {
                crossed_step = i;
                break;
            }
            x = xn;
        }
        if (crossed_step >= 0) {
            ha.add(std::exp(-p.r * (crossed_step + 0.5) * dt));
            ka.add(0.0);
        } else {
            ha.add(0.0);
            ka.add(disc_T * payoff(std::exp(x)));
        }
    });

    Accumulator hit_total, killed_total;
    for (int c = 0; c < kChunks; ++c) {
        hit_total.merge(hit_acc[c]);
        killed_total.merge(killed_acc[c]);
    }
    out.hit = hit_total.estimate(cfg.n_paths);
    out.killed = killed_total.estimate(cfg.n_paths);
    return out;
}

McEstimate mc_terminal_expectation(double spot, double t, double T, const MarketParams& p,
                                   const std::function<double(double)>& payoff,
                                   const McConfig& cfg) {
    if (cfg.n_paths < 2) throw std::invalid_argument("mc_terminal_expectation: need n_paths >= 2");
    const double tau = T - t;
    const double mu = (p.r - p.delta - 0.5 * p.sigma * p.sigma) * tau;
    const double sig = p.sigma * std::sqrt(tau);
    const double disc = std::exp(-p.r * tau);
    const double x0 = std::log(spot);

    std::vector<Accumulator> acc, unused;
    run_chunked(cfg, acc, unused, [&](Rng& rng, Accumulator& a, Accumulator&) {
        a.add(disc * payoff(std::exp(x0 + mu + sig * rng.normal())));
    });
    Accumulator total;
    for (int c = 0; c < kChunks; ++c) total.merge(acc[c]);
    return total.estimate(cfg.n_paths);
}

}  // namespace capstop
