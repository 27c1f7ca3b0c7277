#include "capstop/quadrature.hpp"

#include <cmath>

namespace capstop {

namespace {

struct SimpsonState {
    const std::function<double(double)>& f;
    double rel_tol;
    double abs_floor;
    double worst_error = 0.0;
    bool ok = true;
};

double simpson(double fa, double fm, double fb, double h6) { return h6 * (fa + 4.0 * fm + fb); }

double recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = st.f(lm), frm = st.f(rm);
    const double h12 = (b - a) / 12.0;
    const double left = simpson(fa, flm, fm, h12);
    const double right = simpson(fm, frm, fb, h12);
    const double err = (left + right - whole) / 15.0;
    const double scale = std::max(st.abs_floor, std::abs(left + right));
    if (std::abs(err) <= st.rel_tol * scale || !std::isfinite(err)) {
        return left + right + err;
    }
    if (depth <= 0) {
        st.ok = false;
        st.worst_error = std::max(st.worst_error, std::abs(err) / scale);
        return left + right + err;
    }
    return recurse(st, a, m, fa, flm, fm, left, depth - 1) +
           recurse(st, m, b, fm, frm, fb, right, depth - 1);
}

}  // namespace

QuadratureOutcome adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                   const QuadratureOptions& opt) {
    QuadratureOutcome out;
    if (a == b) return out;
    SimpsonState st{f, opt.rel_tol, opt.abs_floor};
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = simpson(fa, fm, fb, (b - a) / 6.0);
    out.value = recurse(st, a, b, fa, fm, fb, whole, opt.max_depth);
    out.converged = st.ok;
    out.error_estimate = st.ok ? opt.rel_tol * std::abs(out.value) : st.worst_error * std::abs(out.value);
    return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt) {
    const QuadratureOutcome out = adaptive_simpson(f, a, b, opt);
    if (!out.converged) {
        throw QuadratureError("quadrature did not reach the requested tolerance (achieved " +
                                  std::to_string(out.error_estimate / std::max(1e-300, std::abs(out.value))) +
                                  " relative)",
                              out.error_estimate);
    }
    return out.value;
}

double composite_simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (a == b) return 0.0;
    if (panels < 1) panels = 1;
    const int n = 2 * panels;
    const double h = (b - a) / n;
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < n; i += 2) odd += f(a + h * i);
    for (int i = 2; i < n; i += 2) even += f(a + h * i);
    return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

}  // namespace capstop
