#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bicons/core.hpp"
#include "bicons/systems.hpp"

namespace bicons {

using StateUnion = std::variant<BicState, BicKState, PnmcState, BihState>;

struct IntegrationSpec {
    SystemKind system = SystemKind::Bic;
    double s0 = 0.0;
    double s_end = 1.0;
    StateUnion initial_state;
    std::optional<NormalProfile> profile;  // required for Bic/BicK, absent otherwise
    Epsilon eps;
    ToleranceConfig tol;
    long max_steps = 200000;
    double sample_stride = 0.01;  // upper bound on the spacing of emitted samples
};

struct SampleDiagnostics {
    double gauss_residual = 0.0;  // NaN unless system == BicK
    double bih_residual = 0.0;    // NaN unless system == Bih
    double omega_margin = 0.0;    // smallest domain-condition magnitude
    double profile_value = 0.0;   // v(s) at the sample (NaN for Pnmc/Bih)
};

struct TrajectorySample {
    double s = 0.0;
    std::vector<double> state;  // packed fields in declaration order
    std::vector<double> deriv;  // right-hand side at (s, state)
    SampleDiagnostics diag;
};

enum class TerminalKind { ReachedEnd, DomainExit, StepLimit, StepFailure };

const char* terminal_name(TerminalKind k);

struct Terminal {
    TerminalKind kind = TerminalKind::ReachedEnd;
    std::string condition;  // offending condition id when kind == DomainExit
    double s_exit = 0.0;    // bracketed exit abscissa, or last good s otherwise
};

/// Dense record of one integration: strictly monotone samples, each carrying
/// its state, right-hand side and per-sample residual diagnostics. Only the
/// final sample may sit on the domain boundary (terminal == DomainExit).
struct Trajectory {
    SystemKind system = SystemKind::Bic;
    Epsilon eps;
    std::vector<TrajectorySample> samples;
    Terminal terminal;

    std::size_t size() const { return samples.size(); }
    double s_at(std::size_t i) const { return samples[i].s; }
    bool increasing() const;
    double s_min() const;
    double s_max() const;

    BicState bic_at(std::size_t i) const;
    BicKState bick_at(std::size_t i) const;
    PnmcState pnmc_at(std::size_t i) const;
    BihState bih_at(std::size_t i) const;
};

/// Adaptive embedded Runge-Kutta integration of the requested system with
/// per-step domain monitoring. Stops at the first domain-boundary crossing,
/// bracketing the exit abscissa to within tol.abs_tol by bisection on the
/// offending condition.
Trajectory integrate(const IntegrationSpec& spec);

/// Cubic Hermite interpolation between the two samples bracketing s, using
/// the stored states and right-hand sides; collocates at sample points.
/// Throws PreconditionError when s lies outside the sampled range.
std::vector<double> dense_eval(const Trajectory& traj, double s);

/// Convenience: packed state of a typed state union.
std::vector<double> pack_state(const StateUnion& st);
StateUnion unpack_state(SystemKind kind, const std::vector<double>& packed);

}  // namespace bicons
