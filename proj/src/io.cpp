#include "capstop/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "capstop/config.hpp"

namespace capstop {

std::string format_double(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
    return buf;
}

std::string format_sig(double x, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
    return buf;
}

namespace {

std::string boundary_field(const Boundary& b, double t) {
    if (!b.contains(t)) return "";
    const double v = b.value_at(t);
    if (std::isinf(v)) return "inf";
    return format_double(v, 9);
}

void collect_nodes(const std::optional<Boundary>& b, std::vector<double>& times) {
    if (!b) return;
    const TimeGrid& g = b->grid();
    for (std::size_t i = 0; i < g.size(); ++i) times.push_back(g.node(i));
}

}  // namespace

std::string boundary_csv(const SolveReport& report) {
    std::vector<double> times;
    collect_nodes(report.uncapped, times);
    collect_nodes(report.post_switch, times);
    collect_nodes(report.pre_switch, times);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                times.end());

    std::ostringstream out;
    out << "t,B,B_L2,B_L1\n";
    for (double t : times) {
        out << format_double(t, 9) << ',';
        if (report.uncapped) out << boundary_field(*report.uncapped, t);
        out << ',';
        if (report.post_switch) out << boundary_field(*report.post_switch, t);
        out << ',';
        if (report.pre_switch) out << boundary_field(*report.pre_switch, t);
        out << '\n';
    }
    return out.str();
}

std::string times_summary(const SolveReport& report) {
    std::ostringstream out;
    out << "case=" << to_string(report.case_label) << '\n';
    const auto line = [&](const char* key, const std::optional<double>& v) {
        out << key << '=';
        if (v) out << format_double(*v, 9);
        out << '\n';
    };
    line("t0", report.dominance_time);
    line("T0", report.band_open_time);
    line("t1", report.band_close_time);
    out << "t_star=" << format_double(report.cap_cross_time, 9) << '\n';
    line("t_star1", report.cap_touch_time);
    return out.str();
}

std::string prices_csv(const std::vector<PriceRow>& rows) {
    std::ostringstream out;
    out << "S,t,price\n";
    for (const PriceRow& r : rows) {
        out << format_double(r.spot, 9) << ',' << format_double(r.t, 9) << ','
            << format_sig(r.price, 10) << '\n';
    }
    return out.str();
}

std::vector<std::pair<double, double>> parse_boundary_column(const std::string& csv,
                                                             const std::string& column) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) return {};
    std::vector<std::string> headers;
    {
        std::istringstream h(line);
        std::string item;
        while (std::getline(h, item, ',')) headers.push_back(item);
    }
    const auto it = std::find(headers.begin(), headers.end(), column);
    if (it == headers.end()) throw IoError("parse_boundary_column: no column " + column);
    const auto idx = static_cast<std::size_t>(it - headers.begin());

    std::vector<std::pair<double, double>> out;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream row(line);
        std::string item;
        while (std::getline(row, item, ',')) fields.push_back(item);
        while (fields.size() < headers.size()) fields.emplace_back();
        if (fields[idx].empty()) continue;
        const double t = std::stod(fields[0]);
        const double v = fields[idx] == "inf" ? Boundary::infinite_value() : std::stod(fields[idx]);
        out.emplace_back(t, v);
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << content;
    if (!out) throw IoError("failed writing output file: " + path);
}

}  // namespace capstop
