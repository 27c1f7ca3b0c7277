#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capstop/types.hpp"

namespace capstop {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshSpec {
    double s_min = 0.0, s_max = 0.0;
    int s_count = 0;
    double t_min = 0.0, t_max = 0.0;
    int t_count = 0;
};

struct OracleSpec {
    int lattice_steps = 20000;
    long long mc_paths = 0;  ///< 0: skip the Monte Carlo check
    int mc_steps = 256;
};

/// Run configuration parsed from a flat key=value file with dotted section
/// prefixes (e.g. `market.r=0.1`). `#` starts a comment; blank lines ignored.
struct RunConfig {
    MarketParams market{0.05, 0.0, 0.2, 1.0};
    TwoLevelCap cap{1.2, 1.3, 1.0, 2.0};
    int uncapped_steps = 400;
    int pre_switch_steps = 200;
    std::vector<std::pair<double, double>> price_points;  ///< (spot, t)
    std::optional<MeshSpec> mesh;
    std::optional<OracleSpec> oracle;
    std::string out_dir = ".";
    bool assume_smooth_fit = false;
    std::uint64_t seed = 1;

    /// All price query points, mesh expanded, in file order.
    std::vector<std::pair<double, double>> all_query_points() const;
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

}  // namespace capstop
