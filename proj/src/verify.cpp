#include "bicons/verify.hpp"

#include <cmath>
#include <sstream>

#include "bicons/quadrature.hpp"

namespace bicons {

bool ResidualReport::all_pass() const {
    for (const auto& [name, stats] : checks) {
        if (!stats.pass) return false;
    }
    return true;
}

const CheckStats* ResidualReport::find(const std::string& name) const {
    for (const auto& [n, stats] : checks) {
        if (n == name) return &stats;
    }
    return nullptr;
}

namespace {

struct MaxTracker {
    double max_abs = 0.0;
    double argmax_s = 0.0;
    std::size_t samples = 0;

    void feed(double s, double value) {
        ++samples;
        const double a = std::abs(value);
        if (a >= max_abs) {
            max_abs = a;
            argmax_s = s;
        }
    }

    CheckStats stats(double tol) const {
        return CheckStats{max_abs, argmax_s, samples, max_abs <= tol};
    }
};

}  // namespace

ResidualReport codazzi_residuals(const Trajectory& traj, double residual_tol) {
    if (traj.system != SystemKind::Bic && traj.system != SystemKind::BicK) {
        throw InvalidParameter("codazzi_residuals requires a Bic or BicK trajectory");
    }
    if (!(residual_tol > 0.0)) throw InvalidParameter("residual tolerance must be > 0");
    const bool with_k = traj.system == SystemKind::BicK;
    const double eps = traj.eps.value;

    MaxTracker e1k1, bicon, e1gauss;
    for (const auto& smp : traj.samples) {
        const double u = smp.state[0], w = smp.state[1], x = smp.state[2],
                     y = smp.state[3];
        const double dw = smp.deriv[1], dy = smp.deriv[3];
        const double v = smp.diag.profile_value;
        const double k1 = 2.0 * w - y;
        e1k1.feed(smp.s, (2.0 * dw - dy) - ((y - k1) / (2.0 * w)) * (dw - 2.0 * w * u));
        bicon.feed(smp.s, (k1 + w) * dw + w * x * v);
        if (with_k) {
            const double k = smp.state[4];
            const double dk = smp.deriv[4];
            e1gauss.feed(smp.s, dk - (6.0 * w * dw - 4.0 * u * (w * w - k + eps)));
        }
    }

    ResidualReport rep;
    rep.tol = residual_tol;
    rep.checks.emplace_back("e1_k1", e1k1.stats(residual_tol));
    rep.checks.emplace_back("biconservativity", bicon.stats(residual_tol));
    if (with_k) rep.checks.emplace_back("e1_gauss", e1gauss.stats(residual_tol));
    return rep;
}

PnmcConstants pnmc_constants(const UProfile& u, double s0, Epsilon eps) {
    require_finite(s0, "s0");
    require_finite(eps.value, "epsilon");
    const double u0 = u.u(s0);
    if (u0 == 0.0) throw PreconditionError("pnmc_constants requires u(s0) != 0");
    const double du = u.du(s0);
    const double d2u = u.d2u(s0);
    PnmcConstants c;
    c.c1_sq = 3.5 * du - 0.75 * d2u / u0 - 2.0 * u0 * u0 - 2.0 * eps.value;
    c.c2_sq = 9.0 * (d2u / (4.0 * u0) - 1.5 * du + u0 * u0 + eps.value);
    c.realizable = c.c1_sq > 0.0 && c.c2_sq > 0.0;
    return c;
}

double pnmc_compat_residual(const UProfile& u, double s, Epsilon eps) {
    const double u0 = u.u(s);
    const double d1 = u.du(s);
    const double d2 = u.d2u(s);
    const double d3 = u.d3u(s);
    const double u2 = u0 * u0, u3 = u2 * u0, u5 = u3 * u2;
    return 3.0 * d3 * u0 - 3.0 * d2 * d1 + 72.0 * d1 * u3 - 26.0 * d2 * u2 -
           32.0 * eps.value * u3 - 32.0 * u5;
}

ResidualReport pnmc_beta_check(const UProfile& u, const PnmcInitialCondition& ic,
                               Epsilon eps, Interval interval,
                               const ToleranceConfig& tol) {
    tol.validate();
    require_finite(ic.s0, "s0");
    require_finite(ic.x0, "x0");
    require_finite(ic.y0, "y0");
    if (interval.empty()) throw InvalidParameter("beta-check interval is empty");
    if (!interval.contains(ic.s0)) {
        throw PreconditionError("beta-check interval must contain s0");
    }

    const double u0 = u.u(ic.s0);
    const double du0 = u.du(ic.s0);
    const double d2u0 = u.d2u(ic.s0);
    const double e = eps.value;
    const double r1 = ic.x0 * ic.x0 + ic.y0 * ic.y0 / 3.0 - (e + u0 * u0 - du0);
    const double r2 = 6.0 * u0 * ic.x0 * ic.x0 + (14.0 / 9.0) * u0 * ic.y0 * ic.y0 -
                      (-d2u0 + 2.0 * e * u0 + 2.0 * u0 * u0 * u0);
    if (std::abs(r1) > tol.constraint_tol || std::abs(r2) > tol.constraint_tol) {
        std::ostringstream os;
        os << "PNMC initial constraints violated: residuals (" << r1 << ", " << r2
           << ") exceed constraint_tol " << tol.constraint_tol;
        throw PreconditionError(os.str());
    }

    const int n = 201;
    const double quad_tol = std::min(1e-13, tol.constraint_tol * 1e-5);
    auto u_fn = [&u](double s) { return u.u(s); };

    MaxTracker compat, beta;
    // Primitive of u relative to s0, accumulated panel by panel.
    double prev_s = ic.s0;
    double U = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = interval.lo + (interval.hi - interval.lo) * i / (n - 1);
        U += integrate_adaptive(u_fn, prev_s, s, quad_tol);
        prev_s = s;
        const double us = u.u(s);
        const double x = ic.x0 * std::exp(2.0 * U);
        const double y = ic.y0 * std::exp((4.0 / 3.0) * U);
        beta.feed(s, u.du(s) - e + y * y / 3.0 + x * x - us * us);
        compat.feed(s, pnmc_compat_residual(u, s, eps));
    }

    ResidualReport rep;
    rep.tol = tol.residual_tol;
    rep.checks.emplace_back("compat_residual", compat.stats(tol.residual_tol));
    rep.checks.emplace_back("beta", beta.stats(10.0 * tol.constraint_tol));
    return rep;
}

double bih_poly_y_zero(double F, double c, double C, Epsilon eps) {
    require_finite(F, "F");
    require_finite(c, "c");
    require_finite(C, "C");
    require_finite(eps.value, "epsilon");
    if (!(c > 0.0)) throw PreconditionError("bih_poly_y_zero requires c > 0");
    const double e = eps.value;
    const double F3 = F * F * F;
    const double F4 = F3 * F;
    const double F7 = F4 * F3;
    const double F10 = F7 * F3;
    const double c3 = c * c * c;
    return 5.0 * c * F10 - 2.0 * c * C * F7 - 10.0 * c * e * F4 + 18.0 * c3 * C * F3 -
           18.0 * c3 * e;
}

double bih_poly_k_eps(double f, double c, double C, Epsilon eps) {
    require_finite(f, "f");
    require_finite(c, "c");
    require_finite(C, "C");
    require_finite(eps.value, "epsilon");
    if (!(c > 0.0)) throw PreconditionError("bih_poly_k_eps requires c > 0");
    const double e = eps.value;
    const double f2 = f * f;
    const double f3 = f2 * f;
    const double f4 = f3 * f;
    const double f5 = f4 * f;
    const double f6 = f5 * f;
    const double c2 = c * c;
    const double c4 = c2 * c2;
    return -18.0 * c4 * f6 + 18.0 * c2 * (4.0 * c + C) * f5 -
           36.0 * c * (3.0 * c + 2.0 * C) * f4 + 9.0 * (8.0 * c + 9.0 * C) * f3 +
           16.0 * c2 * e * f2 - 16.0 * c * e * f - 36.0 * e;
}

double bih_sixth_eq_residual(FamilyId id, const FamilyParams& p, double chart) {
    const FamilyPoint pt = eval_family(id, p, chart);
    const FamilyChartDerivs d = eval_family_chart_derivs(id, p, chart);
    const auto [G, Gp] = first_integral_sq(id, p, chart);
    if (!(G > 0.0)) {
        throw DomainViolation("radicand", "chart outside the first integral's positive range");
    }
    const double rate = std::sqrt(G);
    // w is linear in the chart for every family, so d2w/ds2 = dw * G'/2.
    const double dw_ds = rate * d.dw;
    const double d2w_ds2 = d.dw * 0.5 * Gp;
    const double k1 = 2.0 * pt.w - pt.y;
    const double k2 = pt.y;
    return d2w_ds2 - (pt.u * dw_ds +
                      pt.w * (pt.v * pt.v + k1 * k1 + k2 * k2 - 2.0 * p.eps.value));
}

bool family_has_obstruction_poly(FamilyId id) {
    return id == FamilyId::YZero || id == FamilyId::KEqualsEpsilon;
}

double family_obstruction_poly(FamilyId id, const FamilyParams& p, double chart) {
    switch (id) {
        case FamilyId::YZero: return bih_poly_y_zero(chart, p.c, p.C, p.eps);
        case FamilyId::KEqualsEpsilon: return bih_poly_k_eps(chart, p.c, p.C, p.eps);
        default:
            throw InvalidParameter("family has no printed obstruction polynomial");
    }
}

}  // namespace bicons
