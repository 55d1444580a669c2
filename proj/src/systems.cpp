#include "bicons/systems.hpp"

#include <cmath>

namespace bicons {

const char* system_name(SystemKind k) {
    switch (k) {
        case SystemKind::Bic: return "bic";
        case SystemKind::BicK: return "bick";
        case SystemKind::Pnmc: return "pnmc";
        case SystemKind::Bih: return "bih";
    }
    return "?";
}

SystemKind system_from_name(const std::string& name) {
    if (name == "bic") return SystemKind::Bic;
    if (name == "bick") return SystemKind::BicK;
    if (name == "pnmc") return SystemKind::Pnmc;
    if (name == "bih") return SystemKind::Bih;
    throw InvalidParameter("unknown system '" + name + "' (expected bic|bick|pnmc|bih)");
}

int state_dim(SystemKind k) {
    switch (k) {
        case SystemKind::Bic: return 4;
        case SystemKind::BicK: return 5;
        case SystemKind::Pnmc: return 3;
        case SystemKind::Bih: return 6;
    }
    return 0;
}

namespace {

void check_denominator(double w, double y) {
    if (3.0 * w - y == 0.0) {
        throw DegenerateDenominator("3w - y = 0 in right-hand side evaluation");
    }
}

}  // namespace

BicState rhs_bic(const BicState& st, double v, Epsilon eps) {
    require_finite(st.u, "u");
    require_finite(st.w, "w");
    require_finite(st.x, "x");
    require_finite(st.y, "y");
    require_finite(v, "v");
    require_finite(eps.value, "epsilon");
    check_denominator(st.w, st.y);
    BicState d;
    d.u = eps.value + st.y * (2.0 * st.w - st.y) - st.x * st.x + st.u * st.u;
    d.w = -st.w * st.x * v / (3.0 * st.w - st.y);
    d.x = 2.0 * st.x * st.u + st.y * v;
    d.y = 2.0 * st.u * (st.y - st.w) - st.x * v;
    return d;
}

BicState rhs_bic(double s, const BicState& st, const NormalProfile& v, Epsilon eps) {
    return rhs_bic(st, v(s), eps);
}

BicKState rhs_bic_k(const BicKState& st, double v, Epsilon eps) {
    require_finite(st.u, "u");
    require_finite(st.w, "w");
    require_finite(st.x, "x");
    require_finite(st.y, "y");
    require_finite(st.k, "k");
    require_finite(v, "v");
    require_finite(eps.value, "epsilon");
    check_denominator(st.w, st.y);
    BicKState d;
    d.u = st.k + st.u * st.u;
    d.w = -st.w * st.x * v / (3.0 * st.w - st.y);
    d.x = 2.0 * st.x * st.u + st.y * v;
    d.y = 2.0 * st.u * (st.y - st.w) - st.x * v;
    d.k = -6.0 * st.w * st.w * st.x * v / (3.0 * st.w - st.y) -
          4.0 * st.u * (st.w * st.w - st.k + eps.value);
    return d;
}

BicKState rhs_bic_k(double s, const BicKState& st, const NormalProfile& v, Epsilon eps) {
    return rhs_bic_k(st, v(s), eps);
}

double gauss_constraint_residual(const BicKState& st, Epsilon eps) {
    require_finite(st.k, "k");
    require_finite(eps.value, "epsilon");
    return st.k - (eps.value + st.y * (2.0 * st.w - st.y) - st.x * st.x);
}

PnmcState rhs_pnmc(double, const PnmcState& st, Epsilon eps) {
    require_finite(st.u, "u");
    require_finite(st.x, "x");
    require_finite(st.y, "y");
    require_finite(eps.value, "epsilon");
    PnmcState d;
    d.u = eps.value - st.y * st.y / 3.0 - st.x * st.x + st.u * st.u;
    d.x = 2.0 * st.x * st.u;
    d.y = (4.0 / 3.0) * st.y * st.u;
    return d;
}

BihState rhs_bih(double, const BihState& st, Epsilon eps) {
    require_finite(st.u, "u");
    require_finite(st.v, "v");
    require_finite(st.w, "w");
    require_finite(st.x, "x");
    require_finite(st.y, "y");
    require_finite(st.z, "z");
    require_finite(eps.value, "epsilon");
    if (!(st.w > 0.0)) {
        throw DomainViolation("w_positive", "biharmonic system requires w > 0");
    }
    const double k1 = 2.0 * st.w - st.y;
    BihState d;
    d.u = eps.value + st.y * (2.0 * st.w - st.y) - st.x * st.x + st.u * st.u;
    d.v = -2.0 * st.v * st.z / st.w + st.u * st.v + 2.0 * st.x * (st.w - st.y);
    d.w = st.z;
    d.x = 2.0 * st.x * st.u + st.y * st.v;
    d.y = 2.0 * st.u * (st.y - st.w) - st.x * st.v;
    d.z = st.u * st.z +
          st.w * (st.v * st.v + k1 * k1 + st.y * st.y - 2.0 * eps.value);
    return d;
}

double bih_constraint_residual(const BihState& st) {
    require_finite(st.v, "v");
    require_finite(st.w, "w");
    require_finite(st.x, "x");
    require_finite(st.y, "y");
    require_finite(st.z, "z");
    return (3.0 * st.w - st.y) * st.z + st.w * st.x * st.v;
}

}  // namespace bicons
