#include "bicons/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bicons/quadrature.hpp"
#include "bicons/rk45.hpp"
#include "bicons/systems.hpp"

namespace bicons {

namespace {
constexpr double kBoundsCap = 1e6;
constexpr double kBoundsFloor = 1e-9;
}  // namespace

const char* family_name(FamilyId id) {
    switch (id) {
        case FamilyId::YZero: return "y-zero";
        case FamilyId::KEqualsEpsilon: return "k-eps";
        case FamilyId::GeneralPlus: return "general-plus";
        case FamilyId::GeneralMinus: return "general-minus";
        case FamilyId::ThreeF2: return "three-f2";
    }
    return "?";
}

FamilyId family_from_name(const std::string& name) {
    if (name == "y-zero") return FamilyId::YZero;
    if (name == "k-eps") return FamilyId::KEqualsEpsilon;
    if (name == "general-plus") return FamilyId::GeneralPlus;
    if (name == "general-minus") return FamilyId::GeneralMinus;
    if (name == "three-f2") return FamilyId::ThreeF2;
    throw InvalidParameter("unknown family '" + name +
                           "' (expected y-zero|k-eps|general-plus|general-minus|three-f2)");
}

void validate_family_params(FamilyId id, const FamilyParams& p) {
    require_finite(p.eps.value, "epsilon");
    require_finite(p.c, "family constant c");
    require_finite(p.C, "first-integral constant C");
    if (p.c2) require_finite(*p.c2, "family constant c2");

    const bool general = id == FamilyId::GeneralPlus || id == FamilyId::GeneralMinus;
    if (general && !p.c2) {
        throw InvalidParameter("family requires the second constant c2");
    }
    if (!general && p.c2) {
        throw InvalidParameter("family does not take a second constant c2");
    }

    switch (id) {
        case FamilyId::YZero:
        case FamilyId::KEqualsEpsilon:
            if (!(p.c > 0.0)) throw InvalidParameter("constant c must be positive");
            break;
        case FamilyId::GeneralPlus:
            if (!(p.c > 0.0)) throw InvalidParameter("constant c1 must be positive");
            if (!(*p.c2 > 0.0)) throw InvalidParameter("constant c2 must be positive");
            break;
        case FamilyId::GeneralMinus:
            if (!(p.c > 0.0)) throw InvalidParameter("constant c1 must be positive");
            break;  // c2 unrestricted
        case FamilyId::ThreeF2:
            if (!(p.c < 0.0)) throw InvalidParameter("constant c must be negative");
            break;
    }
    if (p.eps.value >= 0.0 && !(p.C > 0.0)) {
        throw InvalidParameter("first-integral constant C must be positive when eps >= 0");
    }
}

FamilyParams make_family_params(FamilyId id, Epsilon eps, double c, double C,
                                std::optional<double> c2) {
    FamilyParams p{eps, c, C, c2};
    validate_family_params(id, p);
    return p;
}

namespace {

[[noreturn]] void radicand_error(FamilyId id, const char* which, double chart, double val) {
    std::ostringstream os;
    os << "family " << family_name(id) << ": square-root argument '" << which
       << "' is " << val << " at chart=" << chart << " (must be > 0)";
    throw DomainViolation("radicand", os.str());
}

void require_chart(FamilyId id, double chart) {
    require_finite(chart, "chart parameter");
    if (!(chart > 0.0)) {
        throw DomainViolation("chart_positive",
                              std::string("family ") + family_name(id) +
                                  ": chart parameter must be positive");
    }
}

// Shared evaluation of the General pair; YZero is the c2 = 0 member of the
// minus branch (with c1 = c), which keeps the two bitwise identical there.
struct GeneralTerms {
    double R, Rp;  // radicand under u and its chart derivative
    double S, Sp;  // radicand under x and its chart derivative
};

GeneralTerms general_terms(double sign, const FamilyParams& p, double F) {
    const double c1 = p.c;
    const double c2 = p.c2.value_or(0.0);
    const double eps = p.eps.value;
    GeneralTerms t;
    t.R = p.C * F * F * F + sign * F * F * F * F * F * F - eps;
    t.Rp = 3.0 * p.C * F * F + sign * 6.0 * F * F * F * F * F;
    t.S = 2.0 * c2 - c2 * c2 * F - sign * F * F * F / (c1 * c1);
    t.Sp = -c2 * c2 - sign * 3.0 * F * F / (c1 * c1);
    return t;
}

FamilyPoint general_eval(FamilyId id, double sign, const FamilyParams& p, double F) {
    const auto t = general_terms(sign, p, F);
    if (!(t.R > 0.0)) radicand_error(id, "C F^3 +/- F^6 - eps", F, t.R);
    if (!(t.S > 0.0)) radicand_error(id, "2 c2 - c2^2 F -/+ F^3/c1^2", F, t.S);
    const double c1 = p.c;
    const double c2 = p.c2.value_or(0.0);
    const double sqrtR = std::sqrt(t.R);
    const double sqrtS = std::sqrt(t.S);
    const double sqrtF = std::sqrt(F);
    FamilyPoint pt;
    pt.chart = F;
    pt.u = sqrtR;
    pt.w = c1 * F;
    pt.x = c1 * F * sqrtF * sqrtS;
    pt.y = c1 * c2 * F * F;
    pt.k = p.eps.value + sign * F * F * F * F * F * F;
    pt.v = 2.0 * (c2 * F - 3.0) * sqrtR / (3.0 * sqrtF * sqrtS);
    return pt;
}

FamilyChartDerivs general_derivs(FamilyId id, double sign, const FamilyParams& p, double F) {
    const auto t = general_terms(sign, p, F);
    if (!(t.R > 0.0)) radicand_error(id, "C F^3 +/- F^6 - eps", F, t.R);
    if (!(t.S > 0.0)) radicand_error(id, "2 c2 - c2^2 F -/+ F^3/c1^2", F, t.S);
    const double c1 = p.c;
    const double c2 = p.c2.value_or(0.0);
    const double sqrtR = std::sqrt(t.R);
    const double sqrtS = std::sqrt(t.S);
    const double sqrtF = std::sqrt(F);
    FamilyChartDerivs d;
    d.du = t.Rp / (2.0 * sqrtR);
    d.dw = c1;
    d.dx = c1 * sqrtF * (3.0 * t.S + F * t.Sp) / (2.0 * sqrtS);
    d.dy = 2.0 * c1 * c2 * F;
    d.dk = sign * 6.0 * F * F * F * F * F;
    d.dv = (2.0 / (3.0 * sqrtF * sqrtS)) *
           (c2 * sqrtR + (c2 * F - 3.0) * (t.Rp / (2.0 * sqrtR) - sqrtR / (2.0 * F) -
                                           sqrtR * t.Sp / (2.0 * t.S)));
    return d;
}

struct KepsTerms {
    double Q, Qp, lin;  // Q = 9 C f^3 - 4 eps, lin = 2 - c f
};

KepsTerms keps_terms(const FamilyParams& p, double f) {
    KepsTerms t;
    t.Q = 9.0 * p.C * f * f * f - 4.0 * p.eps.value;
    t.Qp = 27.0 * p.C * f * f;
    t.lin = 2.0 - p.c * f;
    return t;
}

FamilyPoint keps_eval(const FamilyParams& p, double f) {
    const auto t = keps_terms(p, f);
    if (!(t.Q > 0.0)) radicand_error(FamilyId::KEqualsEpsilon, "9 C f^3 - 4 eps", f, t.Q);
    if (!(t.lin > 0.0)) radicand_error(FamilyId::KEqualsEpsilon, "2 - c f", f, t.lin);
    const double c = p.c;
    const double sqrtQ = std::sqrt(t.Q);
    const double sqrtc = std::sqrt(c);
    const double sqrtf = std::sqrt(f);
    const double sqrtl = std::sqrt(t.lin);
    FamilyPoint pt;
    pt.chart = f;
    pt.u = 0.5 * sqrtQ;
    pt.w = f;
    pt.x = sqrtc * f * sqrtf * sqrtl;
    pt.y = c * f * f;
    pt.k = p.eps.value;
    pt.v = (c * f - 3.0) * sqrtQ / (3.0 * sqrtc * sqrtf * sqrtl);
    return pt;
}

FamilyChartDerivs keps_derivs(const FamilyParams& p, double f) {
    const auto t = keps_terms(p, f);
    if (!(t.Q > 0.0)) radicand_error(FamilyId::KEqualsEpsilon, "9 C f^3 - 4 eps", f, t.Q);
    if (!(t.lin > 0.0)) radicand_error(FamilyId::KEqualsEpsilon, "2 - c f", f, t.lin);
    const double c = p.c;
    const double sqrtQ = std::sqrt(t.Q);
    const double sqrtc = std::sqrt(c);
    const double sqrtf = std::sqrt(f);
    const double sqrtl = std::sqrt(t.lin);
    FamilyChartDerivs d;
    d.du = t.Qp / (4.0 * sqrtQ);
    d.dw = 1.0;
    d.dx = sqrtc * sqrtf * (3.0 - 2.0 * c * f) / sqrtl;
    d.dy = 2.0 * c * f;
    d.dk = 0.0;
    d.dv = (1.0 / (3.0 * sqrtc * sqrtf * sqrtl)) *
           (c * sqrtQ + (c * f - 3.0) * (t.Qp / (2.0 * sqrtQ) - sqrtQ / (2.0 * f) +
                                         c * sqrtQ / (2.0 * t.lin)));
    return d;
}

struct ThreeTerms {
    double P, Pp;  // P = C f^{3/2} - 16 f^2 - (16/9) eps
    double T, Tp;  // T = -4 c sqrt(f) - c^2
};

ThreeTerms three_terms(const FamilyParams& p, double f) {
    const double sqrtf = std::sqrt(f);
    ThreeTerms t;
    t.P = p.C * f * sqrtf - 16.0 * f * f - (16.0 / 9.0) * p.eps.value;
    t.Pp = 1.5 * p.C * sqrtf - 32.0 * f;
    t.T = -4.0 * p.c * sqrtf - p.c * p.c;
    t.Tp = -2.0 * p.c / sqrtf;
    return t;
}

FamilyPoint three_eval(const FamilyParams& p, double f) {
    const auto t = three_terms(p, f);
    if (!(t.P > 0.0)) radicand_error(FamilyId::ThreeF2, "C f^{3/2} - 16 f^2 - 16 eps/9", f, t.P);
    if (!(t.T > 0.0)) radicand_error(FamilyId::ThreeF2, "-4 c sqrt(f) - c^2", f, t.T);
    const double sqrtf = std::sqrt(f);
    const double sqrtP = std::sqrt(t.P);
    const double sqrtT = std::sqrt(t.T);
    FamilyPoint pt;
    pt.chart = f;
    pt.u = 0.75 * sqrtP;
    pt.w = f;
    pt.x = std::sqrt(f * t.T);
    pt.y = 3.0 * f + p.c * sqrtf;
    pt.k = p.eps.value - 3.0 * f * f;
    pt.v = p.c * sqrtP / sqrtT;
    return pt;
}

FamilyChartDerivs three_derivs(const FamilyParams& p, double f) {
    const auto t = three_terms(p, f);
    if (!(t.P > 0.0)) radicand_error(FamilyId::ThreeF2, "C f^{3/2} - 16 f^2 - 16 eps/9", f, t.P);
    if (!(t.T > 0.0)) radicand_error(FamilyId::ThreeF2, "-4 c sqrt(f) - c^2", f, t.T);
    const double sqrtf = std::sqrt(f);
    const double sqrtP = std::sqrt(t.P);
    const double sqrtT = std::sqrt(t.T);
    const double x = std::sqrt(f * t.T);
    FamilyChartDerivs d;
    d.du = 0.375 * t.Pp / sqrtP;
    d.dw = 1.0;
    d.dx = (-6.0 * p.c * sqrtf - p.c * p.c) / (2.0 * x);
    d.dy = 3.0 + p.c / (2.0 * sqrtf);
    d.dk = -6.0 * f;
    d.dv = (p.c / (2.0 * sqrtT)) * (t.Pp / sqrtP - sqrtP * t.Tp / t.T);
    return d;
}

}  // namespace

FamilyPoint eval_family(FamilyId id, const FamilyParams& p, double chart) {
    validate_family_params(id, p);
    require_chart(id, chart);
    switch (id) {
        case FamilyId::YZero: {
            FamilyParams q = p;
            q.c2 = 0.0;
            return general_eval(id, -1.0, q, chart);
        }
        case FamilyId::GeneralPlus: return general_eval(id, +1.0, p, chart);
        case FamilyId::GeneralMinus: return general_eval(id, -1.0, p, chart);
        case FamilyId::KEqualsEpsilon: return keps_eval(p, chart);
        case FamilyId::ThreeF2: return three_eval(p, chart);
    }
    throw InvalidParameter("unknown family");
}

FamilyChartDerivs eval_family_chart_derivs(FamilyId id, const FamilyParams& p, double chart) {
    validate_family_params(id, p);
    require_chart(id, chart);
    switch (id) {
        case FamilyId::YZero: {
            FamilyParams q = p;
            q.c2 = 0.0;
            return general_derivs(id, -1.0, q, chart);
        }
        case FamilyId::GeneralPlus: return general_derivs(id, +1.0, p, chart);
        case FamilyId::GeneralMinus: return general_derivs(id, -1.0, p, chart);
        case FamilyId::KEqualsEpsilon: return keps_derivs(p, chart);
        case FamilyId::ThreeF2: return three_derivs(p, chart);
    }
    throw InvalidParameter("unknown family");
}

namespace {

std::vector<std::function<double(double)>> radicands(FamilyId id, const FamilyParams& p) {
    switch (id) {
        case FamilyId::YZero:
        case FamilyId::GeneralMinus:
            return {
                [p](double F) { return general_terms(-1.0, p, F).R; },
                [p](double F) { return general_terms(-1.0, p, F).S; },
            };
        case FamilyId::GeneralPlus:
            return {
                [p](double F) { return general_terms(+1.0, p, F).R; },
                [p](double F) { return general_terms(+1.0, p, F).S; },
            };
        case FamilyId::KEqualsEpsilon:
            return {
                [p](double f) { return keps_terms(p, f).Q; },
                [p](double f) { return keps_terms(p, f).lin; },
            };
        case FamilyId::ThreeF2:
            return {
                [p](double f) { return three_terms(p, f).P; },
                [p](double f) { return three_terms(p, f).T; },
            };
    }
    throw InvalidParameter("unknown family");
}

ChartBounds y_zero_bounds(const FamilyParams& p) {
    const double eps = p.eps.value, C = p.C;
    const double disc = C * C - 4.0 * eps;
    if (eps >= 0.0 && !(disc > 0.0)) {
        throw NoAdmissibleRange("y-zero family: C^2 <= 4 eps leaves no admissible chart range");
    }
    const double root = std::sqrt(disc);
    ChartBounds b;
    b.hi = std::cbrt(0.5 * (C + root));
    b.lo = eps < 0.0 ? 0.0 : std::cbrt(std::max(0.0, 0.5 * (C - root)));
    return b;
}

double bisect_boundary(const std::function<bool(double)>& inside, double bad, double good) {
    // Refines the switch point between a failing and a passing abscissa.
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (bad + good);
        if (std::abs(good - bad) <= 1e-12 * std::max(1.0, std::abs(mid))) break;
        if (inside(mid)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    return 0.5 * (bad + good);
}

}  // namespace

ChartBounds family_bounds(FamilyId id, const FamilyParams& p) {
    validate_family_params(id, p);
    if (id == FamilyId::YZero) return y_zero_bounds(p);

    const auto rads = radicands(id, p);
    auto inside = [&rads](double t) {
        for (const auto& r : rads) {
            if (!(r(t) > 0.0)) return false;
        }
        return true;
    };

    const int n = 4000;
    const double log_lo = std::log10(kBoundsFloor);
    const double log_hi = std::log10(kBoundsCap);
    int seed = -1;
    double prev = kBoundsFloor;
    for (int j = 0; j < n; ++j) {
        const double t = std::pow(10.0, log_lo + (log_hi - log_lo) * j / (n - 1));
        if (inside(t)) {
            seed = j;
            break;
        }
        prev = t;
    }
    if (seed < 0) {
        throw NoAdmissibleRange(std::string("family ") + family_name(id) +
                                ": no admissible chart range found in (0, 1e6]");
    }
    const double t_seed = std::pow(10.0, log_lo + (log_hi - log_lo) * seed / (n - 1));

    ChartBounds b;
    b.lo = (seed == 0) ? 0.0 : bisect_boundary(inside, prev, t_seed);

    double last_good = t_seed;
    b.hi = kBoundsCap;
    for (int j = seed + 1; j < n; ++j) {
        const double t = std::pow(10.0, log_lo + (log_hi - log_lo) * j / (n - 1));
        if (!inside(t)) {
            b.hi = bisect_boundary(inside, t, last_good);
            break;
        }
        last_good = t;
    }
    return b;
}

double first_integral_rhs(FamilyId id, const FamilyParams& p, double chart) {
    validate_family_params(id, p);
    require_chart(id, chart);
    switch (id) {
        case FamilyId::YZero:
        case FamilyId::GeneralMinus: {
            const double R = general_terms(-1.0, p, chart).R;
            if (!(R > 0.0)) radicand_error(id, "C F^3 - F^6 - eps", chart, R);
            return (2.0 / 3.0) * chart * std::sqrt(R);
        }
        case FamilyId::GeneralPlus: {
            const double R = general_terms(+1.0, p, chart).R;
            if (!(R > 0.0)) radicand_error(id, "C F^3 + F^6 - eps", chart, R);
            return (2.0 / 3.0) * chart * std::sqrt(R);
        }
        case FamilyId::KEqualsEpsilon: {
            const double arg = p.C * chart * chart * chart - (4.0 / 9.0) * p.eps.value;
            if (!(arg > 0.0)) radicand_error(id, "C f^3 - 4 eps / 9", chart, arg);
            return chart * std::sqrt(arg);
        }
        case FamilyId::ThreeF2: {
            const double P = three_terms(p, chart).P;
            if (!(P > 0.0)) radicand_error(id, "C f^{3/2} - 16 f^2 - 16 eps/9", chart, P);
            return chart * std::sqrt(P);
        }
    }
    throw InvalidParameter("unknown family");
}

std::pair<double, double> first_integral_sq(FamilyId id, const FamilyParams& p, double chart) {
    validate_family_params(id, p);
    require_chart(id, chart);
    const double f = chart;
    const double eps = p.eps.value, C = p.C;
    switch (id) {
        case FamilyId::YZero:
        case FamilyId::GeneralMinus: {
            const double G = (4.0 / 9.0) * (C * std::pow(f, 5) - std::pow(f, 8) - eps * f * f);
            const double Gp = (4.0 / 9.0) * (5.0 * C * std::pow(f, 4) - 8.0 * std::pow(f, 7) - 2.0 * eps * f);
            return {G, Gp};
        }
        case FamilyId::GeneralPlus: {
            const double G = (4.0 / 9.0) * (C * std::pow(f, 5) + std::pow(f, 8) - eps * f * f);
            const double Gp = (4.0 / 9.0) * (5.0 * C * std::pow(f, 4) + 8.0 * std::pow(f, 7) - 2.0 * eps * f);
            return {G, Gp};
        }
        case FamilyId::KEqualsEpsilon: {
            const double G = C * std::pow(f, 5) - (4.0 / 9.0) * eps * f * f;
            const double Gp = 5.0 * C * std::pow(f, 4) - (8.0 / 9.0) * eps * f;
            return {G, Gp};
        }
        case FamilyId::ThreeF2: {
            const double sqrtf = std::sqrt(f);
            const double G = C * std::pow(f, 3) * sqrtf - 16.0 * std::pow(f, 4) -
                             (16.0 / 9.0) * eps * f * f;
            const double Gp = 3.5 * C * f * f * sqrtf - 64.0 * std::pow(f, 3) -
                              (32.0 / 9.0) * eps * f;
            return {G, Gp};
        }
    }
    throw InvalidParameter("unknown family");
}

std::array<double, 5> family_system_residual(FamilyId id, const FamilyParams& p, double chart) {
    const FamilyPoint pt = eval_family(id, p, chart);
    const FamilyChartDerivs d = eval_family_chart_derivs(id, p, chart);
    const double rate = first_integral_rhs(id, p, chart);
    const BicKState st{pt.u, pt.w, pt.x, pt.y, pt.k};
    const BicKState rhs = rhs_bic_k(st, pt.v, p.eps);
    return {
        rate * d.du - rhs.u,
        rate * d.dw - rhs.w,
        rate * d.dx - rhs.x,
        rate * d.dy - rhs.y,
        rate * d.dk - rhs.k,
    };
}

double second_order_residual(FamilyId id, const FamilyParams& p, double chart) {
    const auto [G, Gp] = first_integral_sq(id, p, chart);
    if (!(G > 0.0)) {
        throw DomainViolation("radicand", "chart outside the first integral's positive range");
    }
    const double cdd = 0.5 * Gp;  // chart'' from the differentiated first integral
    const double f = chart;
    const double eps = p.eps.value;
    switch (id) {
        case FamilyId::YZero:
        case FamilyId::GeneralMinus:
            return cdd * f - 2.5 * G - (2.0 / 3.0) * eps * f * f + (2.0 / 3.0) * std::pow(f, 8);
        case FamilyId::GeneralPlus:
            return cdd * f - 2.5 * G - (2.0 / 3.0) * eps * f * f - (2.0 / 3.0) * std::pow(f, 8);
        case FamilyId::KEqualsEpsilon:
            return cdd * f - 2.5 * G - (2.0 / 3.0) * eps * f * f;
        case FamilyId::ThreeF2:
            return cdd * f - 1.75 * G + 4.0 * std::pow(f, 4) - (4.0 / 3.0) * eps * f * f;
    }
    throw InvalidParameter("unknown family");
}

double chart_travel_time(FamilyId id, const FamilyParams& p, double chart_a,
                         double chart_b, double tol) {
    validate_family_params(id, p);
    return integrate_adaptive(
        [&](double t) { return 1.0 / first_integral_rhs(id, p, t); }, chart_a,
        chart_b, tol);
}

// ---------------------------------------------------------------------------
// FamilyFlow
// ---------------------------------------------------------------------------

struct FamilyFlow::Impl {
    FamilyId id;
    FamilyParams params;
    struct Node {
        double s, chart, rate;
    };
    std::vector<Node> nodes;  // ascending in s

    double chart_at(double s) const {
        if (nodes.empty()) throw ProfileRangeError("family flow has no nodes");
        if (s < nodes.front().s || s > nodes.back().s) {
            throw ProfileRangeError("family flow evaluated outside its s-range");
        }
        auto it = std::lower_bound(nodes.begin(), nodes.end(), s,
                                   [](const Node& n, double v) { return n.s < v; });
        if (it != nodes.end() && it->s == s) return it->chart;
        const Node& b = *it;
        const Node& a = *std::prev(it);
        const double h = b.s - a.s;
        const double t = (s - a.s) / h;
        const double t2 = t * t, t3 = t2 * t;
        return (2.0 * t3 - 3.0 * t2 + 1.0) * a.chart + (t3 - 2.0 * t2 + t) * h * a.rate +
               (-2.0 * t3 + 3.0 * t2) * b.chart + (t3 - t2) * h * b.rate;
    }
};

FamilyFlow::FamilyFlow(FamilyId id, const FamilyParams& p, double chart0, double s_lo,
                       double s_hi, double tol, double node_stride) {
    validate_family_params(id, p);
    if (!(s_lo <= 0.0 && 0.0 <= s_hi && s_lo < s_hi)) {
        throw InvalidParameter("family flow range must contain s = 0");
    }
    const ChartBounds b = family_bounds(id, p);
    const double width = b.hi - b.lo;
    const double clip_margin = width * 1e-6;
    if (!(chart0 > b.lo + clip_margin && chart0 < b.hi - clip_margin)) {
        throw PreconditionError("family flow anchor chart0 must lie strictly inside bounds");
    }

    auto impl = std::make_shared<Impl>();
    impl->id = id;
    impl->params = p;

    rk45::Options opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;
    opt.max_step = node_stride;
    opt.max_steps = 4000000;

    auto rate_of = [&](double chart) { return first_integral_rhs(id, p, chart); };
    auto rhs = [&](double, const rk45::Vec<1>& y) {
        return rk45::Vec<1>{rate_of(y[0])};
    };

    auto run_direction = [&](double s_end, std::vector<Impl::Node>& out) {
        if (s_end == 0.0) return;
        out.push_back({0.0, chart0, rate_of(chart0)});
        auto on_step = [&](double, const rk45::Vec<1>&, const rk45::Vec<1>&, double sb,
                           const rk45::Vec<1>& yb, const rk45::Vec<1>& fb) {
            if (!(yb[0] > b.lo + clip_margin && yb[0] < b.hi - clip_margin)) {
                return rk45::StepDecision::Stop;  // clip near the bounds
            }
            out.push_back({sb, yb[0], fb[0]});
            return rk45::StepDecision::Continue;
        };
        rk45::drive<1>(rhs, 0.0, s_end, rk45::Vec<1>{chart0}, opt, on_step);
    };

    std::vector<Impl::Node> fwd, bwd;
    run_direction(s_hi, fwd);
    run_direction(s_lo, bwd);
    std::reverse(bwd.begin(), bwd.end());
    if (!bwd.empty()) bwd.pop_back();  // drop duplicated s = 0 node
    impl->nodes = std::move(bwd);
    if (fwd.empty()) {
        impl->nodes.push_back({0.0, chart0, rate_of(chart0)});
    } else {
        impl->nodes.insert(impl->nodes.end(), fwd.begin(), fwd.end());
    }
    if (impl->nodes.size() < 2) {
        throw PreconditionError("family flow collapsed to a single node; widen the range");
    }
    impl_ = std::move(impl);
}

double FamilyFlow::chart_at(double s) const { return impl_->chart_at(s); }

FamilyPoint FamilyFlow::point_at(double s) const {
    return eval_family(impl_->id, impl_->params, impl_->chart_at(s));
}

Interval FamilyFlow::s_range() const {
    return Interval{impl_->nodes.front().s, impl_->nodes.back().s};
}

NormalProfile FamilyFlow::profile() const {
    auto impl = impl_;
    const Interval r = s_range();
    return NormalProfile::from_callable(
        [impl](double s) {
            return eval_family(impl->id, impl->params, impl->chart_at(s)).v;
        },
        r.lo, r.hi, std::string("family:") + family_name(impl_->id));
}

std::function<double(double)> FamilyFlow::u_callable() const {
    auto impl = impl_;
    return [impl](double s) {
        return eval_family(impl->id, impl->params, impl->chart_at(s)).u;
    };
}

FamilyId FamilyFlow::id() const { return impl_->id; }
const FamilyParams& FamilyFlow::params() const { return impl_->params; }

std::vector<SecondOrderSample> second_order_flow(FamilyId id, const FamilyParams& p,
                                                 double chart0, double chart_target,
                                                 double abs_rel_tol, double stride) {
    validate_family_params(id, p);
    if (!(chart_target > chart0)) {
        throw InvalidParameter("chart_target must lie forward of chart0");
    }
    const double eps = p.eps.value;
    // The second-order chart ODE solved for the second derivative.
    auto cdd = [&](double f, double g) {
        switch (id) {
            case FamilyId::YZero:
            case FamilyId::GeneralMinus:
                return (2.5 * g * g + (2.0 / 3.0) * eps * f * f -
                        (2.0 / 3.0) * std::pow(f, 8)) / f;
            case FamilyId::GeneralPlus:
                return (2.5 * g * g + (2.0 / 3.0) * eps * f * f +
                        (2.0 / 3.0) * std::pow(f, 8)) / f;
            case FamilyId::KEqualsEpsilon:
                return (2.5 * g * g + (2.0 / 3.0) * eps * f * f) / f;
            case FamilyId::ThreeF2:
                return (1.75 * g * g - 4.0 * std::pow(f, 4) +
                        (4.0 / 3.0) * eps * f * f) / f;
        }
        throw InvalidParameter("unknown family");
    };

    const double s_end = chart_travel_time(id, p, chart0, chart_target);
    rk45::Options opt;
    opt.abs_tol = abs_rel_tol;
    opt.rel_tol = abs_rel_tol;
    opt.max_step = stride;
    opt.max_steps = 4000000;

    std::vector<SecondOrderSample> out;
    out.push_back({0.0, chart0, first_integral_rhs(id, p, chart0)});
    auto rhs = [&](double, const rk45::Vec<2>& y) {
        return rk45::Vec<2>{y[1], cdd(y[0], y[1])};
    };
    auto on_step = [&](double, const rk45::Vec<2>&, const rk45::Vec<2>&, double sb,
                       const rk45::Vec<2>& yb, const rk45::Vec<2>&) {
        out.push_back({sb, yb[0], yb[1]});
        return rk45::StepDecision::Continue;
    };
    rk45::drive<2>(rhs, 0.0, s_end, rk45::Vec<2>{chart0, out.front().chart_dot}, opt,
                   on_step);
    return out;
}

// ---------------------------------------------------------------------------
// Metric reconstruction
// ---------------------------------------------------------------------------

double metric_g22(const UProfile& u, double s0, double s, double quad_tol) {
    require_finite(s0, "s0");
    require_finite(s, "s");
    if (s == s0) return 1.0;
    const double integral = integrate_adaptive([&u](double t) { return u.u(t); }, s0, s,
                                               quad_tol);
    return std::exp(-2.0 * integral);
}

double metric_curvature(const UProfile& u, double s) {
    return u.du(s) - u.u(s) * u.u(s);
}

}  // namespace bicons
