#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bicons/core.hpp"
#include "bicons/u_profile.hpp"

namespace bicons {

/// Closed-form solution families, indexed by the geometric condition that
/// singles each one out.
enum class FamilyId {
    YZero,           // k2 = 0; grad f is an A3-eigenvector for eigenvalue 2f
    KEqualsEpsilon,  // constant Gaussian curvature K = eps
    GeneralPlus,     // K = eps + F^6 branch of the shared generalization
    GeneralMinus,    // K = eps - F^6 branch (YZero is its c2 = 0 member)
    ThreeF2,         // 3f^2 + K - eps = 0 (the equality case)
};

const char* family_name(FamilyId id);
FamilyId family_from_name(const std::string& name);

/// Family constants. `c` is the curve constant (c1 for the General pair;
/// negative for ThreeF2), `C` the first-integral constant and `c2` the
/// second constant of the General pair. Sign constraints are rejected at
/// construction via make_family_params.
struct FamilyParams {
    Epsilon eps;
    double c = 1.0;
    double C = 1.0;
    std::optional<double> c2;
};

FamilyParams make_family_params(FamilyId id, Epsilon eps, double c, double C,
                                std::optional<double> c2 = std::nullopt);
void validate_family_params(FamilyId id, const FamilyParams& p);

/// One family point in the chart parameterized by F (or f), carrying every
/// frame coefficient plus the Gaussian curvature.
struct FamilyPoint {
    double chart = 0.0;
    double u = 0.0, v = 0.0, w = 0.0, x = 0.0, y = 0.0, k = 0.0;
};

/// Hand-derived d/dchart of the closed forms (cross-checked against finite
/// differences in the test suite).
struct FamilyChartDerivs {
    double du = 0.0, dv = 0.0, dw = 0.0, dx = 0.0, dy = 0.0, dk = 0.0;
};

struct ChartBounds {
    double lo = 0.0;
    double hi = 0.0;
};

FamilyPoint eval_family(FamilyId id, const FamilyParams& p, double chart);
FamilyChartDerivs eval_family_chart_derivs(FamilyId id, const FamilyParams& p, double chart);

/// Open chart interval on which every square-root argument is strictly
/// positive. Closed form for YZero; bracketed bisection on the radicands over
/// (0, 1e6] for the other families (the leftmost positive component is
/// returned). Throws NoAdmissibleRange when the interval is empty.
ChartBounds family_bounds(FamilyId id, const FamilyParams& p);

/// dchart/ds > 0 along the family (the first integral).
double first_integral_rhs(FamilyId id, const FamilyParams& p, double chart);

/// (G, dG/dchart) with G = (dchart/ds)^2. Shared by the residual evaluators.
std::pair<double, double> first_integral_sq(FamilyId id, const FamilyParams& p, double chart);

/// Residual of the five system rows (u, w, x, y, k) after converting chart
/// derivatives to s-derivatives through the first integral. Magnitudes at
/// interior chart values are pure roundoff.
std::array<double, 5> family_system_residual(FamilyId id, const FamilyParams& p, double chart);

/// Residual of the family's second-order chart ODE, with the second
/// derivative taken from the differentiated first integral.
double second_order_residual(FamilyId id, const FamilyParams& p, double chart);

/// s-duration needed to travel between two interior chart values.
double chart_travel_time(FamilyId id, const FamilyParams& p, double chart_a,
                         double chart_b, double tol = 1e-12);

/// Chart position as a function of arc parameter s along a family, anchored
/// at chart(0) = chart0. Precomputes a dense node table by integrating the
/// first integral; interpolation between nodes is cubic Hermite with exact
/// node derivatives. The realized s-range may be clipped where the chart
/// approaches the admissible bounds.
class FamilyFlow {
public:
    FamilyFlow(FamilyId id, const FamilyParams& p, double chart0, double s_lo,
               double s_hi, double tol = 1e-12, double node_stride = 2e-3);

    double chart_at(double s) const;
    FamilyPoint point_at(double s) const;
    Interval s_range() const;

    /// The family's normal-connection coefficient as a profile in s.
    NormalProfile profile() const;
    /// u(s) along the family, e.g. for quadrature of the metric factor.
    std::function<double(double)> u_callable() const;

    FamilyId id() const;
    const FamilyParams& params() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Sample of the second-order reconstruction (chart, dchart/ds) of a family
/// ODE, used for first-integral drift measurements.
struct SecondOrderSample {
    double s = 0.0;
    double chart = 0.0;
    double chart_dot = 0.0;
};

/// Integrates the family's second-order chart ODE as a 2D first-order system
/// from an on-family initial condition at chart0 until the chart reaches
/// chart_target (which must lie forward of chart0).
std::vector<SecondOrderSample> second_order_flow(FamilyId id, const FamilyParams& p,
                                                 double chart0, double chart_target,
                                                 double abs_rel_tol = 1e-12,
                                                 double stride = 0.01);

// ---------------------------------------------------------------------------
// Metric reconstruction
// ---------------------------------------------------------------------------

/// g22(s) = exp(-2 * integral of u over [s0, s]) by adaptive quadrature,
/// normalized so g22(s0) = 1 (the coefficient is unique up to one positive
/// multiplicative constant).
double metric_g22(const UProfile& u, double s0, double s, double quad_tol = 1e-12);

/// Gaussian curvature of the reconstructed metric: du/ds - u^2.
double metric_curvature(const UProfile& u, double s);

}  // namespace bicons
