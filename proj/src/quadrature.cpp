#include "bicons/quadrature.hpp"

#include <cmath>

namespace bicons {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double fa, double fm, double fb, double whole, double tol,
                int depth) {
    if (depth <= 0) {
        throw QuadratureFailure("adaptive Simpson recursion depth exhausted");
    }
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    require_finite(flm, "quadrature integrand");
    require_finite(frm, "quadrature integrand");
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_depth) {
    require_finite(a, "quadrature endpoint");
    require_finite(b, "quadrature endpoint");
    if (!(tol > 0.0)) throw InvalidParameter("quadrature tolerance must be > 0");
    if (a == b) return 0.0;
    if (a > b) return -integrate_adaptive(f, b, a, tol, max_depth);
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    require_finite(fa, "quadrature integrand");
    require_finite(fm, "quadrature integrand");
    require_finite(fb, "quadrature integrand");
    const double whole = simpson(fa, fm, fb, b - a);
    return adaptive(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace bicons
