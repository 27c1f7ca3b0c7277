#include "capstop/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace capstop {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) throw ConfigError("config: " + key + " must be an integer");
    return i;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

std::vector<std::pair<double, double>> RunConfig::all_query_points() const {
    std::vector<std::pair<double, double>> pts = price_points;
    if (mesh) {
        for (int i = 0; i < mesh->s_count; ++i) {
            const double s = mesh->s_count == 1
                                 ? mesh->s_min
                                 : mesh->s_min + (mesh->s_max - mesh->s_min) * i / (mesh->s_count - 1);
            for (int j = 0; j < mesh->t_count; ++j) {
                const double t = mesh->t_count == 1
                                     ? mesh->t_min
                                     : mesh->t_min + (mesh->t_max - mesh->t_min) * j / (mesh->t_count - 1);
                pts.emplace_back(s, t);
            }
        }
    }
    return pts;
}

RunConfig parse_run_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(line_no));
        kv[key] = value;
    }

    const auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    const auto require = [&](const char* key) {
        auto v = take(key);
        if (!v) throw ConfigError(std::string("config: missing required key ") + key);
        return *v;
    };

    const double r = to_double("market.r", require("market.r"));
    const double delta = to_double("market.delta", require("market.delta"));
    const double sigma = to_double("market.sigma", require("market.sigma"));
    const double strike = to_double("market.K", require("market.K"));

    const double l1 = to_double("cap.L1", require("cap.L1"));
    const double l2 = to_double("cap.L2", require("cap.L2"));
    const double t1 = to_double("cap.T1", require("cap.T1"));
    const double t2 = to_double("cap.T2", require("cap.T2"));
    CapContinuity cont = l1 > l2 ? CapContinuity::LeftContinuous : CapContinuity::RightContinuous;
    if (auto c = take("cap.continuity")) {
        if (*c == "left") cont = CapContinuity::LeftContinuous;
        else if (*c == "right") cont = CapContinuity::RightContinuous;
        else throw ConfigError("config: cap.continuity must be 'left' or 'right'");
    }

    RunConfig cfg;
    try {
        cfg.market = MarketParams(r, delta, sigma, strike);
        cfg.cap = TwoLevelCap(l1, l2, t1, t2, cont);
        cfg.cap.validate(cfg.market);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (auto v = take("grids.uncapped_steps")) cfg.uncapped_steps = to_int("grids.uncapped_steps", *v);
    if (auto v = take("grids.twolevel_steps")) cfg.pre_switch_steps = to_int("grids.twolevel_steps", *v);
    if (cfg.uncapped_steps < 10 || cfg.pre_switch_steps < 10)
        throw ConfigError("config: grid step counts must be at least 10");

    if (auto v = take("price.points")) {
        for (const std::string& item : split(*v, ';')) {
            if (item.empty()) continue;
            const auto parts = split(item, ',');
            if (parts.size() != 2) throw ConfigError("config: price.points entries must be S,t");
            cfg.price_points.emplace_back(to_double("price.points S", parts[0]),
                                          to_double("price.points t", parts[1]));
        }
    }
    if (kv.count("price.mesh.s") || kv.count("price.mesh.t")) {
        MeshSpec m;
        const auto ms = split(require("price.mesh.s"), ',');
        const auto mt = split(require("price.mesh.t"), ',');
        if (ms.size() != 3 || mt.size() != 3)
            throw ConfigError("config: price.mesh.s/t must be min,max,count");
        m.s_min = to_double("price.mesh.s", ms[0]);
        m.s_max = to_double("price.mesh.s", ms[1]);
        m.s_count = to_int("price.mesh.s", ms[2]);
        m.t_min = to_double("price.mesh.t", mt[0]);
        m.t_max = to_double("price.mesh.t", mt[1]);
        m.t_count = to_int("price.mesh.t", mt[2]);
        if (m.s_count < 1 || m.t_count < 1) throw ConfigError("config: mesh counts must be >= 1");
        cfg.mesh = m;
    }

    if (kv.count("oracle.lattice_steps") || kv.count("oracle.mc_paths")) {
        OracleSpec o;
        if (auto v = take("oracle.lattice_steps")) o.lattice_steps = to_int("oracle.lattice_steps", *v);
        if (auto v = take("oracle.mc_paths")) o.mc_paths = static_cast<long long>(to_double("oracle.mc_paths", *v));
        if (auto v = take("oracle.mc_steps")) o.mc_steps = to_int("oracle.mc_steps", *v);
        cfg.oracle = o;
    }

    if (auto v = take("outputs.dir")) cfg.out_dir = *v;
    if (auto v = take("assume_smooth_fit")) cfg.assume_smooth_fit = to_bool("assume_smooth_fit", *v);
    if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(to_double("seed", *v));

    if (!kv.empty()) throw ConfigError("config: unknown key '" + kv.begin()->first + "'");

    for (const auto& [s, t] : cfg.all_query_points()) {
        if (!(s > 0.0)) throw ConfigError("config: price query spot must be positive");
        if (t < 0.0 || t >= cfg.cap.maturity)
            throw ConfigError("config: price query time must lie in [0, maturity)");
    }
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config_text(buf.str());
}

}  // namespace capstop
