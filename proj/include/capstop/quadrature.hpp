#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace capstop {

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved_tolerance)
        : std::runtime_error(what), achieved_tolerance_(achieved_tolerance) {}
    double achieved_tolerance() const { return achieved_tolerance_; }

private:
    double achieved_tolerance_;
};

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_floor = 1e-14;  ///< below this scale the relative target is not enforced
    int max_depth = 40;
};

struct QuadratureOutcome {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

/// Adaptive Simpson on [a, b].
QuadratureOutcome adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                   const QuadratureOptions& opt = {});

/// Adaptive Simpson that throws QuadratureError (with the achieved tolerance)
/// when the error target cannot be met.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt = {});

/// Composite Simpson with `panels` panels (panels >= 1; rounded up to even
/// subdivision internally: 2*panels+1 evaluations).
double composite_simpson(const std::function<double(double)>& f, double a, double b, int panels);

}  // namespace capstop
