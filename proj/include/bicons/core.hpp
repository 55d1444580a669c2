#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bicons {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for all structured errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A state (or an evaluation) left its admissible domain.
struct DomainViolation : Error {
    explicit DomainViolation(const std::string& cond, const std::string& what)
        : Error(what), condition(cond) {}
    std::string condition;
};

/// The denominator 3w - y vanished in a right-hand-side evaluation.
struct DegenerateDenominator : DomainViolation {
    explicit DegenerateDenominator(const std::string& what)
        : DomainViolation("denom_3w_minus_y", what) {}
};

/// A profile was evaluated outside its declared interval.
struct ProfileRangeError : Error {
    using Error::Error;
};

/// A NaN or infinity reached an operation that requires finite reals.
struct NonFiniteValue : Error {
    using Error::Error;
};

/// A parameter or configuration value violates its invariant.
struct InvalidParameter : Error {
    using Error::Error;
};

/// A closed-form family has no admissible chart interval for the parameters.
struct NoAdmissibleRange : Error {
    using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureFailure : Error {
    using Error::Error;
};

/// An operation's stated precondition does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

bool is_finite(double v);
void require_finite(double v, const std::string& label);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Sectional curvature of the ambient space form. Any finite real.
struct Epsilon {
    double value = 0.0;
};

/// State of the tangent-part system: (u, w, x, y) = (a2, f, alpha, k2).
struct BicState {
    double u = 0.0;  // connection coefficient a2, 1/length
    double w = 0.0;  // mean curvature f = |H|, 1/length
    double x = 0.0;  // A4-eigenvalue alpha, 1/length
    double y = 0.0;  // A3-eigenvalue k2, 1/length
};

/// Curvature-augmented state: BicState plus the Gaussian curvature k.
struct BicKState {
    double u = 0.0;
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double k = 0.0;  // Gaussian curvature, 1/length^2

    BicState project() const { return BicState{u, w, x, y}; }
};

/// State of the parallel-normalized-mean-curvature (PNMC) system.
struct PnmcState {
    double u = 0.0;  // a2
    double x = 0.0;  // alpha
    double y = 0.0;  // k2
};

/// State of the biharmonic system, with z = df/ds and v = b1 as unknowns.
struct BihState {
    double u = 0.0;
    double v = 0.0;  // normal-connection coefficient b1
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;  // df/ds, 1/length^2
};

/// Numerical tolerances shared across integration and verification.
struct ToleranceConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double constraint_tol = 1e-8;
    double residual_tol = 1e-8;
    double domain_margin = 1e-9;

    /// Throws InvalidParameter unless every field is strictly positive.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Normal-connection profile v(s) = b1(s)
// ---------------------------------------------------------------------------

/// Prescribed normal-connection coefficient v : I -> R^*.
///
/// Variants: a nonzero constant, a polynomial in s, a linearly interpolated
/// table (rejects evaluation outside its sample range), or an arbitrary
/// callable on a declared interval (used for family-derived profiles).
/// Evaluation raises NonFiniteValue on non-finite results and Error when the
/// profile vanishes, since v must map into R^*.
class NormalProfile {
public:
    static NormalProfile constant(double value);
    static NormalProfile polynomial(std::vector<double> coefficients);
    static NormalProfile tabulated(std::vector<std::pair<double, double>> samples);
    static NormalProfile from_callable(std::function<double(double)> fn,
                                       double lo, double hi, std::string label);

    double operator()(double s) const;

    /// Interval on which evaluation is allowed (infinite for const/poly).
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::string& label() const { return label_; }

    /// Profile of the reversed solution: v~(s) = -v(-s).
    NormalProfile reversed() const;
    /// Profile of the sign-flipped solution: -v(s).
    NormalProfile negated() const;

private:
    NormalProfile() = default;
    std::function<double(double)> fn_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    std::string label_;
};

// ---------------------------------------------------------------------------
// Domain membership
// ---------------------------------------------------------------------------

struct ConditionCheck {
    std::string name;
    double magnitude = 0.0;  // signed distance to the condition's boundary
    bool pass = false;
};

struct MembershipReport {
    std::vector<ConditionCheck> conditions;
    bool all_pass = false;
    double min_margin = 0.0;  // smallest magnitude over all conditions

    const ConditionCheck* find(const std::string& name) const;
};

/// Membership in Omega: u != 0, w > 0, x > 0, |3w - y| > margin and
/// |3w^2 + y(2w - y) - x^2| > margin. margin = 0 gives the exact inequalities.
MembershipReport omega_membership(const BicState& state, double margin);

/// Membership in Omega-bar: as Omega with the second inequality replaced by
/// |3w^2 + k - eps| > margin.
MembershipReport omega_bar_membership(const BicKState& state, Epsilon eps, double margin);

/// PNMC domain: u > 0, x > 0, y > 0 (each beyond margin).
MembershipReport pnmc_membership(const PnmcState& state, double margin);

/// Biharmonic domain: u != 0, v != 0, w > 0, x > 0, z > 0.
MembershipReport bih_membership(const BihState& state, double margin);

}  // namespace bicons
