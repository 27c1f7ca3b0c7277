#include "capstop/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "capstop/analytic.hpp"
#include "capstop/io.hpp"
#include "capstop/lattice.hpp"
#include "capstop/monte_carlo.hpp"

namespace capstop {

namespace {

std::string diagnostics_text(const TwoLevelSolution& sol) {
    const SolveDiagnostics& d = sol.report().diagnostics;
    std::ostringstream out;
    out << "uncapped_max_residual=" << format_sig(d.uncapped_max_residual, 6) << '\n';
    out << "pre_switch_max_residual=" << format_sig(d.pre_switch_max_residual, 6) << '\n';
    int flagged = 0;
    for (const NodeResidual& r : d.pre_switch_residuals)
        if (r.flagged) ++flagged;
    out << "flagged_nodes=" << flagged << '\n';
    for (const NodeResidual& r : d.pre_switch_residuals) {
        if (!r.flagged) continue;
        out << "flagged_node t=" << format_double(r.t, 9)
            << " residual=" << format_sig(r.residual, 6) << '\n';
    }
    if (!d.boundary_slopes.empty()) {
        double worst = 0.0;
        for (double s : d.boundary_slopes)
            if (std::isfinite(s)) worst = std::max(worst, std::abs(s));
        out << "max_boundary_slope_estimate=" << format_sig(worst, 6) << '\n';
    }
    for (const std::string& note : d.notes) out << "note=" << note << '\n';
    return out.str();
}

}  // namespace

RunOutputs run(const RunConfig& cfg, bool run_oracle,
               std::shared_ptr<const TwoLevelSolution>& solution_out) {
    TwoLevelConfig solver_cfg;
    solver_cfg.uncapped_steps = cfg.uncapped_steps;
    solver_cfg.pre_switch_steps = cfg.pre_switch_steps;
    solver_cfg.assume_smooth_fit = cfg.assume_smooth_fit;

    auto sol = std::make_shared<const TwoLevelSolution>(
        TwoLevelSolution::solve(cfg.market, cfg.cap, solver_cfg));
    solution_out = sol;

    std::vector<PriceRow> rows;
    for (const auto& [s, t] : cfg.all_query_points()) rows.push_back({s, t, sol->price(s, t)});

    std::string diag = diagnostics_text(*sol);
    if (run_oracle && !rows.empty()) {
        const OracleSpec spec = cfg.oracle.value_or(OracleSpec{});
        LatticeConfig lat;
        lat.n_steps = spec.lattice_steps;
        std::ostringstream extra;
        double worst = 0.0;
        for (const PriceRow& r : rows) {
            const double lp = lattice_price(r.spot, r.t, cfg.market, cfg.cap, lat);
            const double delta = r.price - lp;
            worst = std::max(worst, std::abs(delta));
            extra << "oracle_delta S=" << format_double(r.spot, 6) << " t=" << format_double(r.t, 6)
                  << " eep=" << format_sig(r.price, 10) << " lattice=" << format_sig(lp, 10)
                  << " delta=" << format_sig(delta, 4) << '\n';
        }
        extra << "oracle_max_delta=" << format_sig(worst, 4) << '\n';
        if (spec.mc_paths > 0) {
            McConfig mc;
            mc.n_paths = spec.mc_paths;
            mc.n_steps = spec.mc_steps;
            mc.seed = cfg.seed;
            const double level = cfg.cap.level2;
            const auto& p = cfg.market;
            const double s0 = rows.front().spot;
            if (s0 != level) {
                const auto est = mc_hitting_expectations(
                    s0, level, 0.0, cfg.cap.maturity, p,
                    [&](double x) { return std::max(std::min(x, level) - p.strike, 0.0); }, mc);
                const double analytic = discounted_hit_before(s0, level, 0.0, cfg.cap.maturity, p);
                extra << "mc_hit mean=" << format_sig(est.hit.mean, 8)
                      << " se=" << format_sig(est.hit.std_error, 4)
                      << " analytic=" << format_sig(analytic, 8) << '\n';
            }
        }
        diag += extra.str();
    }

    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

    RunOutputs outs;
    outs.boundaries_csv = (dir / "boundaries.csv").string();
    outs.times_file = (dir / "times.txt").string();
    outs.prices_csv = (dir / "prices.csv").string();
    outs.diagnostics_file = (dir / "diagnostics.txt").string();

    write_file(outs.boundaries_csv, boundary_csv(sol->report()));
    write_file(outs.times_file, times_summary(sol->report()));
    write_file(outs.prices_csv, prices_csv(rows));
    write_file(outs.diagnostics_file, diag);
    return outs;
}

RunOutputs run(const RunConfig& cfg, bool run_oracle) {
    std::shared_ptr<const TwoLevelSolution> unused;
    return run(cfg, run_oracle, unused);
}

}  // namespace capstop
