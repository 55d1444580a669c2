#include "bicons/u_profile.hpp"

#include <cmath>
#include <limits>

namespace bicons {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Interval full_line() { return Interval{-kInf, kInf}; }
Interval empty_interval() { return Interval{kInf, -kInf}; }
}  // namespace

const char* riccati_branch_name(RiccatiBranch b) {
    switch (b) {
        case RiccatiBranch::Reciprocal: return "recip";
        case RiccatiBranch::Tangent: return "tan";
        case RiccatiBranch::ConstantPositive: return "const+";
        case RiccatiBranch::ConstantNegative: return "const-";
        case RiccatiBranch::ExpOuter: return "exp-outer";
        case RiccatiBranch::ExpInner: return "exp-inner";
    }
    return "?";
}

double UProfile::u(double s) const {
    require_finite(s, "u-profile argument");
    if (!validity_.contains(s)) {
        throw ProfileRangeError("u-profile evaluated outside its validity interval");
    }
    const double v = u_(s);
    require_finite(v, "u-profile value");
    return v;
}

double UProfile::du(double s) const {
    if (!validity_.contains(s)) {
        throw ProfileRangeError("u-profile derivative outside validity interval");
    }
    return du_(s);
}

double UProfile::d2u(double s) const {
    if (!validity_.contains(s)) {
        throw ProfileRangeError("u-profile derivative outside validity interval");
    }
    return d2u_(s);
}

double UProfile::d3u(double s) const {
    if (!validity_.contains(s)) {
        throw ProfileRangeError("u-profile derivative outside validity interval");
    }
    return d3u_(s);
}

UProfile UProfile::constant(double value) {
    require_finite(value, "constant u-profile");
    UProfile p;
    p.u_ = [value](double) { return value; };
    p.du_ = [](double) { return 0.0; };
    p.d2u_ = [](double) { return 0.0; };
    p.d3u_ = [](double) { return 0.0; };
    p.validity_ = full_line();
    p.positivity_ = value > 0.0 ? full_line() : empty_interval();
    return p;
}

UProfile UProfile::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) {
        throw InvalidParameter("polynomial u-profile needs at least one coefficient");
    }
    for (double c : coefficients) require_finite(c, "polynomial coefficient");
    auto horner = [](const std::vector<double>& c, double s) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
        return acc;
    };
    auto derive = [](const std::vector<double>& c) {
        std::vector<double> d;
        for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * double(i));
        if (d.empty()) d.push_back(0.0);
        return d;
    };
    const auto c1 = derive(coefficients);
    const auto c2 = derive(c1);
    const auto c3 = derive(c2);
    UProfile p;
    p.u_ = [horner, c = coefficients](double s) { return horner(c, s); };
    p.du_ = [horner, c = c1](double s) { return horner(c, s); };
    p.d2u_ = [horner, c = c2](double s) { return horner(c, s); };
    p.d3u_ = [horner, c = c3](double s) { return horner(c, s); };
    p.validity_ = full_line();
    p.positivity_ = full_line();  // sign not tracked for polynomials
    return p;
}

UProfile solve_u_riccati(Epsilon eps, RiccatiBranch branch, double shift) {
    return UProfile::riccati(eps, branch, shift);
}

UProfile UProfile::riccati(Epsilon eps, RiccatiBranch branch, double shift) {
    require_finite(eps.value, "epsilon");
    require_finite(shift, "riccati shift");
    const double e = eps.value;

    std::function<double(double)> base;
    Interval valid, pos;
    switch (branch) {
        case RiccatiBranch::Reciprocal: {
            if (e != 0.0) throw InvalidParameter("reciprocal branch requires eps = 0");
            base = [shift](double s) { return 1.0 / (shift - s); };
            valid = Interval{-kInf, shift};
            pos = valid;
            break;
        }
        case RiccatiBranch::Tangent: {
            if (!(e > 0.0)) throw InvalidParameter("tangent branch requires eps > 0");
            const double r = std::sqrt(e);
            base = [r, shift](double s) { return r * std::tan(r * (s + shift)); };
            valid = Interval{-M_PI / (2.0 * r) - shift, M_PI / (2.0 * r) - shift};
            pos = Interval{-shift, M_PI / (2.0 * r) - shift};
            break;
        }
        case RiccatiBranch::ConstantPositive:
        case RiccatiBranch::ConstantNegative: {
            if (!(e < 0.0)) throw InvalidParameter("constant branches require eps < 0");
            const double r = std::sqrt(-e);
            const double val = branch == RiccatiBranch::ConstantPositive ? r : -r;
            base = [val](double) { return val; };
            valid = full_line();
            pos = val > 0.0 ? full_line() : empty_interval();
            break;
        }
        case RiccatiBranch::ExpOuter: {
            if (!(e < 0.0)) throw InvalidParameter("exp branches require eps < 0");
            const double r = std::sqrt(-e);
            base = [r, shift](double s) {
                const double t = std::exp(2.0 * r * (s + shift));
                return r * (1.0 + t) / (1.0 - t);
            };
            valid = Interval{-kInf, -shift};
            pos = valid;
            break;
        }
        case RiccatiBranch::ExpInner: {
            if (!(e < 0.0)) throw InvalidParameter("exp branches require eps < 0");
            const double r = std::sqrt(-e);
            base = [r, shift](double s) {
                const double t = std::exp(2.0 * r * (s + shift));
                return r * (1.0 - t) / (1.0 + t);
            };
            valid = full_line();
            pos = Interval{-kInf, -shift};  // u crosses zero at s = -shift
            break;
        }
        default:
            throw InvalidParameter("unknown Riccati branch");
    }

    // Derivatives follow from the equation itself: u' = e + u^2,
    // u'' = 2 u u', u''' = 2 u'^2 + 2 u u''.
    UProfile p;
    p.u_ = base;
    p.du_ = [base, e](double s) {
        const double u = base(s);
        return e + u * u;
    };
    p.d2u_ = [base, e](double s) {
        const double u = base(s);
        const double up = e + u * u;
        return 2.0 * u * up;
    };
    p.d3u_ = [base, e](double s) {
        const double u = base(s);
        const double up = e + u * u;
        const double upp = 2.0 * u * up;
        return 2.0 * up * up + 2.0 * u * upp;
    };
    p.validity_ = valid;
    p.positivity_ = pos;
    return p;
}

UProfile UProfile::from_callable(std::function<double(double)> fn, Interval valid,
                                 double fd_step) {
    if (!fn) throw InvalidParameter("u-profile callable must not be empty");
    if (valid.empty()) throw InvalidParameter("u-profile interval must be nonempty");
    if (!(fd_step > 0.0)) throw InvalidParameter("finite-difference step must be > 0");
    const double h = fd_step;
    auto f = std::move(fn);

    // Central differences at steps h and h/2, one Richardson level each
    // (h^2 -> h^4 accuracy).
    auto d1_at = [f](double s, double hh) {
        return (f(s + hh) - f(s - hh)) / (2.0 * hh);
    };
    auto d2_at = [f](double s, double hh) {
        return (f(s + hh) - 2.0 * f(s) + f(s - hh)) / (hh * hh);
    };
    auto d3_at = [f](double s, double hh) {
        return (f(s + 2.0 * hh) - 2.0 * f(s + hh) + 2.0 * f(s - hh) -
                f(s - 2.0 * hh)) /
               (2.0 * hh * hh * hh);
    };

    UProfile p;
    p.u_ = f;
    p.du_ = [d1_at, h](double s) {
        return (4.0 * d1_at(s, h / 2.0) - d1_at(s, h)) / 3.0;
    };
    p.d2u_ = [d2_at, h](double s) {
        return (4.0 * d2_at(s, h / 2.0) - d2_at(s, h)) / 3.0;
    };
    p.d3u_ = [d3_at, h](double s) {
        return (4.0 * d3_at(s, h / 2.0) - d3_at(s, h)) / 3.0;
    };
    // Interior shrink keeps the widest finite-difference stencil in range.
    p.validity_ = Interval{valid.lo + 2.0 * h, valid.hi - 2.0 * h};
    if (p.validity_.empty()) {
        throw InvalidParameter("u-profile interval too narrow for the FD stencil");
    }
    p.positivity_ = p.validity_;  // not tracked for callables
    return p;
}

UProfile UProfile::pnmc_trajectory(std::shared_ptr<const Trajectory> traj) {
    if (!traj) throw InvalidParameter("null trajectory");
    if (traj->system != SystemKind::Pnmc) {
        throw InvalidParameter("pnmc_trajectory profile requires a Pnmc trajectory");
    }
    if (traj->size() < 2) throw InvalidParameter("trajectory too short");
    const double e = traj->eps.value;

    struct StateEval {
        double u, x, y;
    };
    auto state_at = [traj](double s) {
        const auto v = dense_eval(*traj, s);
        return StateEval{v[0], v[1], v[2]};
    };

    // Derivatives from the system algebra:
    //   u' = e - y^2/3 - x^2 + u^2,  x' = 2xu,  y' = (4/3) y u.
    auto du_of = [e](const StateEval& st) {
        return e - st.y * st.y / 3.0 - st.x * st.x + st.u * st.u;
    };
    auto d2u_of = [e, du_of](const StateEval& st) {
        const double up = du_of(st);
        return 2.0 * st.u * up - (8.0 / 9.0) * st.y * st.y * st.u -
               4.0 * st.x * st.x * st.u;
    };
    auto d3u_of = [e, du_of, d2u_of](const StateEval& st) {
        const double up = du_of(st);
        const double upp = d2u_of(st);
        const double x2 = st.x * st.x, y2 = st.y * st.y, u2 = st.u * st.u;
        return 2.0 * up * up + 2.0 * st.u * upp -
               (8.0 / 9.0) * ((8.0 / 3.0) * y2 * u2 + y2 * up) -
               4.0 * (4.0 * x2 * u2 + x2 * up);
    };

    UProfile p;
    p.u_ = [state_at](double s) { return state_at(s).u; };
    p.du_ = [state_at, du_of](double s) { return du_of(state_at(s)); };
    p.d2u_ = [state_at, d2u_of](double s) { return d2u_of(state_at(s)); };
    p.d3u_ = [state_at, d3u_of](double s) { return d3u_of(state_at(s)); };
    p.validity_ = Interval{traj->s_min(), traj->s_max()};
    p.positivity_ = p.validity_;  // PNMC domain already enforces u > 0
    return p;
}

}  // namespace bicons
