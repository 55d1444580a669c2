#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bicons/core.hpp"
#include "bicons/families.hpp"
#include "bicons/integrate.hpp"
#include "bicons/u_profile.hpp"

namespace bicons {

struct CheckStats {
    double max_abs = 0.0;
    double argmax_s = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// Named residual maxima over a trajectory or grid; pass iff max_abs <= tol.
struct ResidualReport {
    std::vector<std::pair<std::string, CheckStats>> checks;
    double tol = 0.0;

    bool all_pass() const;
    const CheckStats* find(const std::string& name) const;
};

/// Residuals of the Codazzi-type identities along a Bic or BicK trajectory,
/// using the stored right-hand sides as s-derivatives and k1 = 2w - y:
///   e1_k1:            (2 dw - dy) - ((y - k1)/(2w)) (dw - 2 w u)
///   biconservativity: (k1 + w) dw + w x v
///   e1_gauss (BicK):  dk - (6 w dw - 4 u (w^2 - k + eps))
ResidualReport codazzi_residuals(const Trajectory& traj, double residual_tol);

struct PnmcConstants {
    double c1_sq = 0.0;
    double c2_sq = 0.0;
    bool realizable = false;  // both squared constants strictly positive
};

/// Squared immersion constants recovered from the metric profile u at s0
/// (primitive normalized to U(s0) = 0):
///   c1^2 = (7/2) u' - (3/4) u''/u - 2 u^2 - 2 eps
///   c2^2 = 9 (u''/(4u) - (3/2) u' + u^2 + eps)
PnmcConstants pnmc_constants(const UProfile& u, double s0, Epsilon eps);

/// Third-order compatibility combination that u must annihilate for a PNMC
/// immersion to exist: 3 u''' u - 3 u'' u' + 72 u' u^3 - 26 u'' u^2
///                      - 32 eps u^3 - 32 u^5.
double pnmc_compat_residual(const UProfile& u, double s, Epsilon eps);

struct PnmcInitialCondition {
    double s0 = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
};

/// Reconstructs x = x0 exp(2 U) and y = y0 exp((4/3) U) from the given u and
/// reports max |beta| with beta = u' - eps + y^2/3 + x^2 - u^2, alongside the
/// compatibility residual. The initial condition must satisfy both initial
/// constraints within constraint_tol, otherwise a PreconditionError is
/// raised.
ResidualReport pnmc_beta_check(const UProfile& u, const PnmcInitialCondition& ic,
                               Epsilon eps, Interval interval,
                               const ToleranceConfig& tol);

/// Obstruction polynomial of the y = 0 family:
///   5 c F^10 - 2 c C F^7 - 10 c eps F^4 + 18 c^3 C F^3 - 18 c^3 eps.
double bih_poly_y_zero(double F, double c, double C, Epsilon eps);

/// Obstruction polynomial of the K = eps family:
///   -18 c^4 f^6 + 18 c^2 (4c + C) f^5 - 36 c (3c + 2C) f^4
///   + 9 (8c + 9C) f^3 + 16 c^2 eps f^2 - 16 c eps f - 36 eps.
double bih_poly_k_eps(double f, double c, double C, Epsilon eps);

/// Residual of the sixth (normal-part) equation evaluated on a biconservative
/// family: d2w - (u dw + w (v^2 + k1^2 + k2^2 - 2 eps)), with d2w from the
/// differentiated first integral. Nonzero on interior grids; for the two
/// families with a printed obstruction polynomial it is a chart-factor
/// multiple of that polynomial.
double bih_sixth_eq_residual(FamilyId id, const FamilyParams& p, double chart);

/// Whether the family has a printed obstruction polynomial.
bool family_has_obstruction_poly(FamilyId id);

/// Dispatch to the family's obstruction polynomial (YZero, KEqualsEpsilon).
double family_obstruction_poly(FamilyId id, const FamilyParams& p, double chart);

}  // namespace bicons
