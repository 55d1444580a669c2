#pragma once

// Dormand-Prince 5(4) embedded pair with PI step-size control.
//
// Generic over the state dimension; the integrate module wraps it for the
// four named systems and the families module reuses it for scalar chart
// flows. The driver reports each accepted step through a callback so callers
// can attach sampling, invariant monitoring and event localization.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "bicons/core.hpp"

namespace bicons::rk45 {

template <int N>
using Vec = std::array<double, N>;

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 1000000;
    // Force a fixed step size (used by order-convergence tests); the error
    // estimate is still computed but never rejects.
    double fixed_step = 0.0;
};

enum class DriveStatus { ReachedEnd, Stopped, StepLimit, StepFailure };

struct DriveResult {
    DriveStatus status = DriveStatus::ReachedEnd;
    double last_s = 0.0;
    long accepted = 0;
    long rejected = 0;
};

enum class StepDecision { Continue, Stop };

namespace detail {
// Dormand-Prince coefficients.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                        c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                        a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
// b - b* (5th minus embedded 4th order weights).
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
}  // namespace detail

/// One trial step. On success y1/f1 hold the 5th-order result and its RHS
/// (FSAL), and err_norm the scaled embedded error estimate.
template <int N, class Rhs>
void try_step(Rhs&& rhs, double s, const Vec<N>& y, const Vec<N>& f0, double h,
              Vec<N>& y1, Vec<N>& f1, double& err_norm, const Options& opt) {
    using namespace detail;
    Vec<N> k2, k3, k4, k5, k6, tmp;
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * f0[i];
    k2 = rhs(s + c2 * h, tmp);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * f0[i] + a32 * k2[i]);
    k3 = rhs(s + c3 * h, tmp);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(s + c4 * h, tmp);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(s + c5 * h, tmp);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] +
                             a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(s + h, tmp);
    for (int i = 0; i < N; ++i)
        y1[i] = y[i] + h * (a71 * f0[i] + a73 * k3[i] + a74 * k4[i] +
                            a75 * k5[i] + a76 * k6[i]);
    f1 = rhs(s + h, y1);

    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const double ei = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] +
                               e5 * k5[i] + e6 * k6[i] + e7 * f1[i]);
        const double sc = opt.abs_tol +
                          opt.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
        acc += (ei / sc) * (ei / sc);
    }
    err_norm = std::sqrt(acc / N);
}

/// Hairer-style initial step size guess.
template <int N, class Rhs>
double initial_step(Rhs&& rhs, double s0, const Vec<N>& y0, const Vec<N>& f0,
                    double direction, double span, const Options& opt) {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double sc = opt.abs_tol + opt.rel_tol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, span);
    Vec<N> y1, f1;
    for (int i = 0; i < N; ++i) y1[i] = y0[i] + direction * h0 * f0[i];
    double d2 = 0.0;
    try {
        f1 = rhs(s0 + direction * h0, y1);
        for (int i = 0; i < N; ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::abs(y0[i]);
            d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
        }
        d2 = std::sqrt(d2 / N) / h0;
    } catch (const Error&) {
        d2 = 0.0;  // Euler probe left the domain; fall back to h0.
    }
    const double dm = std::max(d1, d2);
    const double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, span, opt.max_step});
}

/// Adaptive drive from s0 to s_end (either direction). on_step is invoked
/// after every accepted step with (s_prev, y_prev, f_prev, s_new, y_new,
/// f_new) and may stop the run. RHS exceptions derived from Error reject the
/// step and shrink it; persistent rejection ends with StepFailure.
template <int N, class Rhs, class StepCb>
DriveResult drive(Rhs&& rhs, double s0, double s_end, Vec<N> y0,
                  const Options& opt, StepCb&& on_step) {
    DriveResult res;
    res.last_s = s0;
    const double direction = (s_end > s0) ? 1.0 : -1.0;
    const double span = std::abs(s_end - s0);
    if (span == 0.0) throw InvalidParameter("integration range is empty");

    Vec<N> y = y0;
    Vec<N> f = rhs(s0, y);
    double s = s0;
    double h;
    const bool fixed = opt.fixed_step > 0.0;
    if (fixed) {
        h = opt.fixed_step;
    } else {
        h = initial_step<N>(rhs, s0, y, f, direction, span, opt);
        h = std::min(h, opt.max_step);
    }

    constexpr double kSafety = 0.9, kMinScale = 0.2, kMaxScale = 10.0;
    constexpr double kAlpha = 0.7 / 5.0, kBeta = 0.4 / 5.0;
    double err_old = 1e-4;
    long consecutive_failures = 0;

    while (true) {
        if (res.accepted + res.rejected >= opt.max_steps) {
            res.status = DriveStatus::StepLimit;
            return res;
        }
        const double remaining = std::abs(s_end - s);
        if (remaining <= 1e-14 * std::max(1.0, std::abs(s_end))) {
            res.status = DriveStatus::ReachedEnd;
            return res;
        }
        double h_try = std::min({h, remaining, opt.max_step});
        const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::abs(s));
        if (h_try < h_floor) {
            res.status = DriveStatus::StepFailure;
            return res;
        }

        Vec<N> y1, f1;
        double err = 0.0;
        bool stage_failed = false;
        try {
            try_step<N>(rhs, s, y, f, direction * h_try, y1, f1, err, opt);
        } catch (const Error&) {
            stage_failed = true;  // out-of-domain or profile failure mid-step
        }

        if (stage_failed || (!fixed && err > 1.0) || !std::isfinite(err)) {
            ++res.rejected;
            ++consecutive_failures;
            if (consecutive_failures > 60) {
                res.status = DriveStatus::StepFailure;
                return res;
            }
            if (stage_failed || !std::isfinite(err)) {
                h = h_try * 0.5;
            } else {
                h = h_try * std::max(kMinScale, kSafety * std::pow(err, -0.2));
            }
            continue;
        }

        consecutive_failures = 0;
        const double s_new = s + direction * h_try;
        const StepDecision d = on_step(s, y, f, s_new, y1, f1);
        ++res.accepted;
        res.last_s = s_new;
        if (d == StepDecision::Stop) {
            res.status = DriveStatus::Stopped;
            return res;
        }
        s = s_new;
        y = y1;
        f = f1;  // FSAL
        if (!fixed) {
            const double e = std::max(err, 1e-32);
            double scale = kSafety * std::pow(e, -kAlpha) * std::pow(err_old, kBeta);
            scale = std::min(kMaxScale, std::max(kMinScale, scale));
            h = h_try * scale;
            err_old = e;
        }
    }
}

/// Cubic Hermite interpolation on one step (used for dense output and for
/// bracketing domain exits inside a step).
template <int N>
Vec<N> hermite(double s0, const Vec<N>& y0, const Vec<N>& f0, double s1,
               const Vec<N>& y1, const Vec<N>& f1, double s) {
    const double h = s1 - s0;
    const double t = (s - s0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    Vec<N> out;
    for (int i = 0; i < N; ++i) {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    return out;
}

}  // namespace bicons::rk45
