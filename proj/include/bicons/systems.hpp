#pragma once

#include "bicons/core.hpp"

namespace bicons {

/// The four first-order systems handled by the integrator.
enum class SystemKind { Bic, BicK, Pnmc, Bih };

const char* system_name(SystemKind k);
SystemKind system_from_name(const std::string& name);
int state_dim(SystemKind k);

// Right-hand sides. Return values are states whose fields hold the
// s-derivatives of the corresponding input fields. Evaluators are pure and
// total on their stated domains; violations raise structured errors instead
// of clamping.

/// Tangent-part system F_v:
///   du = eps + y(2w - y) - x^2 + u^2
///   dw = -w x v / (3w - y)
///   dx = 2xu + yv
///   dy = 2u(y - w) - xv
BicState rhs_bic(double s, const BicState& st, const NormalProfile& v, Epsilon eps);
BicState rhs_bic(const BicState& st, double v_value, Epsilon eps);

/// Curvature-augmented system F-bar_v. First four rows as F_v with
/// du = k + u^2; fifth row dk = -6w^2 x v/(3w - y) - 4u(w^2 - k + eps).
BicKState rhs_bic_k(double s, const BicKState& st, const NormalProfile& v, Epsilon eps);
BicKState rhs_bic_k(const BicKState& st, double v_value, Epsilon eps);

/// Algebraic Gauss constraint gap: k - (eps + y(2w - y) - x^2).
double gauss_constraint_residual(const BicKState& st, Epsilon eps);

/// PNMC system: du = eps - y^2/3 - x^2 + u^2, dx = 2xu, dy = (4/3) y u.
PnmcState rhs_pnmc(double s, const PnmcState& st, Epsilon eps);

/// Biharmonic system F (v = b1 and z = df/ds evolve as unknowns):
///   du = eps + y(2w - y) - x^2 + u^2
///   dv = -2vz/w + uv + 2x(w - y)
///   dw = z
///   dx = 2xu + yv
///   dy = 2u(y - w) - xv
///   dz = uz + w(v^2 + (2w - y)^2 + y^2 - 2 eps)
BihState rhs_bih(double s, const BihState& st, Epsilon eps);

/// Biconservativity constraint gap: (3w - y) z + w x v.
double bih_constraint_residual(const BihState& st);

}  // namespace bicons
