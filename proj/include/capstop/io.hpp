#pragma once

#include <string>
#include <vector>

#include "capstop/types.hpp"

namespace capstop {

/// `t,B,B_L2,B_L1` rows over the union of the three boundaries' nodes.
/// Infinite values print as the literal `inf`; queries outside a boundary's
/// domain leave the field empty. Times carry 9 decimal digits.
std::string boundary_csv(const SolveReport& report);

/// Structural times and case label as key=value lines.
std::string times_summary(const SolveReport& report);

struct PriceRow {
    double spot = 0.0;
    double t = 0.0;
    double price = 0.0;
};

std::string prices_csv(const std::vector<PriceRow>& rows);

/// Round-trip parse of a boundary CSV column (testing aid): returns the
/// (t, value) pairs of one named column, skipping empty fields.
std::vector<std::pair<double, double>> parse_boundary_column(const std::string& csv,
                                                             const std::string& column);

void write_file(const std::string& path, const std::string& content);

std::string format_double(double x, int decimals);
std::string format_sig(double x, int significant);

}  // namespace capstop
