#include "bicons/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bicons {

bool is_finite(double v) { return std::isfinite(v); }

void require_finite(double v, const std::string& label) {
    if (!std::isfinite(v)) {
        throw NonFiniteValue("non-finite value in " + label);
    }
}

void ToleranceConfig::validate() const {
    auto check = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidParameter(std::string("ToleranceConfig.") + name +
                                   " must be strictly positive and finite");
        }
    };
    check(abs_tol, "abs_tol");
    check(rel_tol, "rel_tol");
    check(constraint_tol, "constraint_tol");
    check(residual_tol, "residual_tol");
    check(domain_margin, "domain_margin");
}

// ---------------------------------------------------------------------------
// NormalProfile
// ---------------------------------------------------------------------------

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

NormalProfile NormalProfile::constant(double value) {
    require_finite(value, "NormalProfile::constant");
    if (value == 0.0) {
        throw InvalidParameter("constant profile must be nonzero (v maps into R^*)");
    }
    NormalProfile p;
    p.fn_ = [value](double) { return value; };
    p.lo_ = -kInf;
    p.hi_ = kInf;
    p.label_ = "const";
    return p;
}

NormalProfile NormalProfile::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) {
        throw InvalidParameter("polynomial profile needs at least one coefficient");
    }
    for (double c : coefficients) require_finite(c, "NormalProfile::polynomial");
    NormalProfile p;
    p.fn_ = [coeffs = std::move(coefficients)](double s) {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
        return acc;
    };
    p.lo_ = -kInf;
    p.hi_ = kInf;
    p.label_ = "poly";
    return p;
}

NormalProfile NormalProfile::tabulated(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) {
        throw InvalidParameter("tabulated profile needs at least two samples");
    }
    for (auto& [s, v] : samples) {
        require_finite(s, "NormalProfile::tabulated abscissa");
        require_finite(v, "NormalProfile::tabulated value");
    }
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i - 1].first < samples[i].first)) {
            throw InvalidParameter("tabulated profile abscissae must be strictly increasing");
        }
    }
    NormalProfile p;
    p.lo_ = samples.front().first;
    p.hi_ = samples.back().first;
    p.fn_ = [tab = std::move(samples)](double s) {
        auto it = std::lower_bound(tab.begin(), tab.end(), s,
                                   [](const auto& a, double b) { return a.first < b; });
        if (it == tab.begin()) return it->second;  // s == lo after range check
        if (it == tab.end()) return tab.back().second;
        auto prev = std::prev(it);
        const double t = (s - prev->first) / (it->first - prev->first);
        return prev->second + t * (it->second - prev->second);
    };
    p.label_ = "table";
    return p;
}

NormalProfile NormalProfile::from_callable(std::function<double(double)> fn,
                                           double lo, double hi, std::string label) {
    if (!fn) throw InvalidParameter("profile callable must not be empty");
    if (!(lo < hi)) throw InvalidParameter("profile interval must satisfy lo < hi");
    NormalProfile p;
    p.fn_ = std::move(fn);
    p.lo_ = lo;
    p.hi_ = hi;
    p.label_ = std::move(label);
    return p;
}

double NormalProfile::operator()(double s) const {
    require_finite(s, "profile argument");
    if (s < lo_ || s > hi_) {
        std::ostringstream os;
        os << "profile '" << label_ << "' evaluated at s=" << s
           << " outside range [" << lo_ << ", " << hi_ << "]";
        throw ProfileRangeError(os.str());
    }
    const double v = fn_(s);
    require_finite(v, "profile value");
    if (v == 0.0) {
        throw Error("profile '" + label_ + "' vanishes at s=" + std::to_string(s));
    }
    return v;
}

NormalProfile NormalProfile::reversed() const {
    NormalProfile p;
    p.fn_ = [base = fn_](double s) { return -base(-s); };
    p.lo_ = (hi_ == kInf) ? -kInf : -hi_;
    p.hi_ = (lo_ == -kInf) ? kInf : -lo_;
    p.label_ = label_ + ":reversed";
    return p;
}

NormalProfile NormalProfile::negated() const {
    NormalProfile p;
    p.fn_ = [base = fn_](double s) { return -base(s); };
    p.lo_ = lo_;
    p.hi_ = hi_;
    p.label_ = label_ + ":negated";
    return p;
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

const ConditionCheck* MembershipReport::find(const std::string& name) const {
    for (const auto& c : conditions) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

MembershipReport finish(std::vector<ConditionCheck> conds) {
    MembershipReport r;
    r.conditions = std::move(conds);
    r.all_pass = true;
    r.min_margin = kInf;
    for (const auto& c : r.conditions) {
        r.all_pass = r.all_pass && c.pass;
        r.min_margin = std::min(r.min_margin, c.magnitude);
    }
    return r;
}

ConditionCheck nonzero(const std::string& name, double v, double margin) {
    return ConditionCheck{name, std::abs(v), std::abs(v) > margin};
}

ConditionCheck positive(const std::string& name, double v, double margin) {
    return ConditionCheck{name, v, v > margin};
}

void require_margin(double margin) {
    require_finite(margin, "membership margin");
    if (margin < 0.0) throw PreconditionError("membership margin must be >= 0");
}

void require_state_finite(std::initializer_list<double> vals) {
    for (double v : vals) require_finite(v, "state field");
}

}  // namespace

MembershipReport omega_membership(const BicState& st, double margin) {
    require_margin(margin);
    require_state_finite({st.u, st.w, st.x, st.y});
    const double second = 3.0 * st.w * st.w + st.y * (2.0 * st.w - st.y) - st.x * st.x;
    return finish({
        nonzero("u_nonzero", st.u, margin),
        positive("w_positive", st.w, margin),
        positive("x_positive", st.x, margin),
        nonzero("denom_3w_minus_y", 3.0 * st.w - st.y, margin),
        nonzero("omega_second", second, margin),
    });
}

MembershipReport omega_bar_membership(const BicKState& st, Epsilon eps, double margin) {
    require_margin(margin);
    require_state_finite({st.u, st.w, st.x, st.y, st.k});
    require_finite(eps.value, "epsilon");
    return finish({
        nonzero("u_nonzero", st.u, margin),
        positive("w_positive", st.w, margin),
        positive("x_positive", st.x, margin),
        nonzero("denom_3w_minus_y", 3.0 * st.w - st.y, margin),
        nonzero("omega_bar_second", 3.0 * st.w * st.w + st.k - eps.value, margin),
    });
}

MembershipReport pnmc_membership(const PnmcState& st, double margin) {
    require_margin(margin);
    require_state_finite({st.u, st.x, st.y});
    return finish({
        positive("u_positive", st.u, margin),
        positive("x_positive", st.x, margin),
        positive("y_positive", st.y, margin),
    });
}

MembershipReport bih_membership(const BihState& st, double margin) {
    require_margin(margin);
    require_state_finite({st.u, st.v, st.w, st.x, st.y, st.z});
    return finish({
        nonzero("u_nonzero", st.u, margin),
        nonzero("v_nonzero", st.v, margin),
        positive("w_positive", st.w, margin),
        positive("x_positive", st.x, margin),
        positive("z_positive", st.z, margin),
    });
}

}  // namespace bicons
