#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bicons/core.hpp"
#include "bicons/integrate.hpp"

namespace bicons {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(lo < hi); }
    bool contains(double s) const { return s >= lo && s <= hi; }
};

/// Closed-form branches of du/ds = eps + u^2.
enum class RiccatiBranch {
    Reciprocal,        // eps = 0: u = 1/(C - s) on (-inf, C)
    Tangent,           // eps > 0: u = sqrt(eps) tan(sqrt(eps)(s + C))
    ConstantPositive,  // eps < 0: u = +sqrt(-eps)
    ConstantNegative,  // eps < 0: u = -sqrt(-eps)
    ExpOuter,          // eps < 0: u = sqrt(-eps)(1 + e^t)/(1 - e^t), |u| > sqrt(-eps)
    ExpInner,          // eps < 0: u = sqrt(-eps)(1 - e^t)/(1 + e^t), |u| < sqrt(-eps)
};

const char* riccati_branch_name(RiccatiBranch b);

/// The metric coefficient profile u(s) = a2(s) with derivatives up to third
/// order. Analytic kinds (constant, polynomial, Riccati) differentiate
/// exactly; callable-backed kinds use central finite differences with one
/// Richardson extrapolation level; PNMC-trajectory-backed profiles derive
/// all derivatives from the system's own right-hand side algebra.
class UProfile {
public:
    double u(double s) const;
    double du(double s) const;
    double d2u(double s) const;
    double d3u(double s) const;

    Interval validity() const { return validity_; }
    /// Sub-interval of validity on which u > 0 (empty if none).
    Interval positivity() const { return positivity_; }

    static UProfile constant(double value);
    static UProfile polynomial(std::vector<double> coefficients);
    static UProfile riccati(Epsilon eps, RiccatiBranch branch, double shift);
    static UProfile from_callable(std::function<double(double)> fn, Interval valid,
                                  double fd_step = 1e-3);
    static UProfile pnmc_trajectory(std::shared_ptr<const Trajectory> traj);

private:
    UProfile() = default;
    std::function<double(double)> u_, du_, d2u_, d3u_;
    Interval validity_;
    Interval positivity_;
};

/// Closed-form solution branch of du/ds = eps + u^2, with its validity
/// interval and the sub-interval where u stays positive. Requesting a branch
/// inconsistent with the sign of eps raises InvalidParameter.
UProfile solve_u_riccati(Epsilon eps, RiccatiBranch branch, double shift);

}  // namespace bicons
