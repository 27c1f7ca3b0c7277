#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "capstop/config.hpp"
#include "capstop/io.hpp"
#include "capstop/pipeline.hpp"
#include "capstop/quadrature.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

int solve_command(const std::string& config_path, const std::string& out_dir, bool oracle,
                  std::uint64_t seed, bool seed_set) {
    capstop::RunConfig cfg = capstop::parse_run_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) cfg.seed = seed;
    const capstop::RunOutputs outs = capstop::run(cfg, oracle);
    std::printf("wrote %s\n", outs.boundaries_csv.c_str());
    std::printf("wrote %s\n", outs.times_file.c_str());
    std::printf("wrote %s\n", outs.prices_csv.c_str());
    std::printf("wrote %s\n", outs.diagnostics_file.c_str());
    return 0;
}

int price_command(const std::string& config_path, double spot, double t) {
    capstop::RunConfig cfg = capstop::parse_run_config(config_path);
    if (!(spot > 0.0)) throw capstop::ConfigError("price: spot must be positive");
    if (t < 0.0 || t >= cfg.cap.maturity)
        throw capstop::ConfigError("price: time must lie in [0, maturity)");
    capstop::TwoLevelConfig solver_cfg;
    solver_cfg.uncapped_steps = cfg.uncapped_steps;
    solver_cfg.pre_switch_steps = cfg.pre_switch_steps;
    solver_cfg.assume_smooth_fit = cfg.assume_smooth_fit;
    const auto sol = capstop::TwoLevelSolution::solve(cfg.market, cfg.cap, solver_cfg);
    std::printf("%s\n", capstop::format_sig(sol.price(spot, t), 10).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American call options with two-level caps: boundary solver and pricer"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool oracle = false;
    std::uint64_t seed = 1;

    auto* solve = app.add_subcommand("solve", "solve boundaries and write output files");
    solve->add_option("--config", config_path, "run configuration file")->required();
    solve->add_option("--out", out_dir, "output directory (overrides outputs.dir)");
    auto* seed_opt = solve->add_option("--seed", seed, "oracle RNG seed");
    solve->add_flag("--oracle", oracle, "append lattice-oracle deltas to diagnostics");

    double spot = 0.0, t = 0.0;
    auto* price = app.add_subcommand("price", "print one price with 10 significant digits");
    price->add_option("--config", config_path, "run configuration file")->required();
    price->add_option("--s", spot, "spot price")->required();
    price->add_option("--t", t, "valuation time in years")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return solve_command(config_path, out_dir, oracle, seed, seed_opt->count() > 0);
        return price_command(config_path, spot, t);
    } catch (const capstop::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const capstop::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const capstop::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const capstop::QuadratureError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolver;
    }
}
