#include <doctest.h>

#include <cmath>
#include <random>

#include "bicons/families.hpp"
#include "bicons/integrate.hpp"
#include "bicons/rk45.hpp"
#include "bicons/systems.hpp"

using namespace bicons;

namespace {

IntegrationSpec base_spec(SystemKind kind, StateUnion ic, double s0, double s1) {
    IntegrationSpec spec;
    spec.system = kind;
    spec.s0 = s0;
    spec.s_end = s1;
    spec.initial_state = ic;
    return spec;
}

// Euler-Maclaurin corrected trapezoid over the stored samples: the endpoint
// derivative correction uses the trajectory's own right-hand sides, keeping
// the quadrature independent of the component it checks.
double trapezoid_of_component(const Trajectory& traj, int comp, std::size_t upto) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 <= upto; ++i) {
        const double h = traj.samples[i + 1].s - traj.samples[i].s;
        const double f0 = traj.samples[i].state[comp];
        const double f1 = traj.samples[i + 1].state[comp];
        const double d0 = traj.samples[i].deriv[comp];
        const double d1 = traj.samples[i + 1].deriv[comp];
        acc += 0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1);
    }
    return acc;
}

}  // namespace

TEST_SUITE("integrate") {

TEST_CASE("PNMC x-component matches its quadrature closed form") {
    auto spec = base_spec(SystemKind::Pnmc, PnmcState{0.5, 1.0, 1.0}, 0.0, 0.3);
    spec.sample_stride = 1e-3;
    const auto traj = integrate(spec);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);
    // x(s) = x0 exp(2 int u): the second PNMC equation is linear in x given u.
    const double x0 = traj.samples.front().state[1];
    for (std::size_t i : {traj.size() / 3, traj.size() / 2, traj.size() - 1}) {
        const double integral_u = trapezoid_of_component(traj, 0, i);
        const double oracle = x0 * std::exp(2.0 * integral_u);
        CHECK(traj.samples[i].state[1] == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("Bic integration from an on-family IC tracks the closed form") {
    const auto params = make_family_params(FamilyId::YZero, Epsilon{1.0}, 1.0, 3.0);
    const auto b = family_bounds(FamilyId::YZero, params);
    const double chart0 = b.lo + 0.3 * (b.hi - b.lo);
    const double chart1 = b.lo + 0.7 * (b.hi - b.lo);
    const double s_len = chart_travel_time(FamilyId::YZero, params, chart0, chart1);
    FamilyFlow flow(FamilyId::YZero, params, chart0, -0.01, s_len * 1.02);

    const FamilyPoint p0 = flow.point_at(0.0);
    auto spec = base_spec(SystemKind::Bic, BicState{p0.u, p0.w, p0.x, p0.y}, 0.0, s_len);
    spec.eps = Epsilon{1.0};
    spec.profile = flow.profile();
    spec.sample_stride = 5e-3;
    const auto traj = integrate(spec);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);

    double max_dev = 0.0;
    for (const auto& smp : traj.samples) {
        const FamilyPoint ref = flow.point_at(smp.s);
        max_dev = std::max(max_dev, std::abs(smp.state[0] - ref.u));
        max_dev = std::max(max_dev, std::abs(smp.state[1] - ref.w));
        max_dev = std::max(max_dev, std::abs(smp.state[2] - ref.x));
        max_dev = std::max(max_dev, std::abs(smp.state[3] - ref.y));
    }
    CHECK(max_dev <= 1e-8);  // 100 * rel_tol
}

TEST_CASE("steering into the 3w - y boundary reports a domain exit") {
    auto spec = base_spec(SystemKind::Bic, BicState{1.0, 1.0, 1.0, 3.0 - 1e-8}, 0.0, 1.0);
    spec.profile = NormalProfile::constant(1.0);
    const auto traj = integrate(spec);
    CHECK(traj.terminal.kind == TerminalKind::DomainExit);
    CHECK(traj.terminal.condition == "denom_3w_minus_y");
}

TEST_CASE("a resolvable boundary approach is bracketed by bisection") {
    // Relaxed margin: the event fires while steps are still resolvable.
    auto spec = base_spec(SystemKind::Bic, BicState{1.0, 1.0, 1.0, 2.0}, 0.0, 2.0);
    spec.profile = NormalProfile::constant(1.0);
    spec.tol.domain_margin = 1e-4;
    const auto traj = integrate(spec);
    CHECK(traj.terminal.kind == TerminalKind::DomainExit);
    CHECK(traj.terminal.condition == "denom_3w_minus_y");
    // all non-terminal samples stay inside the margin
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        CHECK(traj.samples[i].diag.omega_margin > spec.tol.domain_margin);
    }
    // the bracketed exit point sits close to the boundary
    const auto& last = traj.samples.back();
    CHECK(std::abs(3.0 * last.state[1] - last.state[3]) < 2e-4);
}

TEST_CASE("initial state outside the domain is a precondition error") {
    auto spec = base_spec(SystemKind::Bic, BicState{0.0, 1.0, 1.0, 0.0}, 0.0, 1.0);
    spec.profile = NormalProfile::constant(1.0);
    CHECK_THROWS_AS(integrate(spec), PreconditionError);
}

TEST_CASE("profile running out of range ends with a step failure") {
    auto spec = base_spec(SystemKind::Bic, BicState{-0.3, 1.0, 1.0, 0.0}, 0.0, 1.0);
    spec.profile = NormalProfile::tabulated({{0.0, 1.0}, {0.2, 1.0}});
    const auto traj = integrate(spec);
    CHECK(traj.terminal.kind == TerminalKind::StepFailure);
    CHECK(traj.terminal.s_exit == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("step limit is reported") {
    auto spec = base_spec(SystemKind::Pnmc, PnmcState{0.5, 1.0, 1.0}, 0.0, 0.5);
    spec.max_steps = 5;
    const auto traj = integrate(spec);
    CHECK(traj.terminal.kind == TerminalKind::StepLimit);
}

TEST_CASE("config validation rejects inconsistent specs") {
    auto spec = base_spec(SystemKind::Pnmc, PnmcState{0.5, 1.0, 1.0}, 0.0, 0.0);
    CHECK_THROWS_AS(integrate(spec), InvalidParameter);
    spec.s_end = 1.0;
    spec.profile = NormalProfile::constant(1.0);  // pnmc takes no profile
    CHECK_THROWS_AS(integrate(spec), InvalidParameter);
    spec.profile.reset();
    spec.sample_stride = 0.0;
    CHECK_THROWS_AS(integrate(spec), InvalidParameter);
}

TEST_CASE("dense_eval collocates at samples and rejects out-of-range") {
    auto spec = base_spec(SystemKind::Pnmc, PnmcState{0.5, 1.0, 1.0}, 0.0, 0.4);
    const auto traj = integrate(spec);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);
    const auto& mid = traj.samples[traj.size() / 2];
    const auto at = dense_eval(traj, mid.s);
    CHECK(at[0] == mid.state[0]);
    CHECK(at[1] == mid.state[1]);
    CHECK(at[2] == mid.state[2]);
    CHECK_THROWS_AS(dense_eval(traj, -0.1), PreconditionError);
    CHECK_THROWS_AS(dense_eval(traj, 0.5), PreconditionError);
}

TEST_CASE("dense_eval interpolation error scales like h^4") {
    auto make_err = [](double stride) {
        auto spec = base_spec(SystemKind::Pnmc, PnmcState{0.5, 1.0, 1.0}, 0.0, 0.4);
        spec.sample_stride = stride;
        spec.tol.abs_tol = spec.tol.rel_tol = 1e-13;
        const auto traj = integrate(spec);
        auto ref_spec = spec;
        ref_spec.sample_stride = 1e-3;
        const auto ref = integrate(ref_spec);
        double err = 0.0;
        for (int i = 1; i < 40; ++i) {
            const double s = 0.01 * i;
            const auto a = dense_eval(traj, s);
            const auto b = dense_eval(ref, s);
            for (int c = 0; c < 3; ++c) err = std::max(err, std::abs(a[c] - b[c]));
        }
        return err;
    };
    const double e1 = make_err(0.05);
    const double e2 = make_err(0.025);
    CHECK(e2 < e1 / 8.0);  // order >= 3 observed (h^4 expected)
}

TEST_CASE("fixed-step driver converges at order five") {
    const Epsilon eps{0.0};
    const NormalProfile v = NormalProfile::constant(1.0);
    auto rhs = [&](double s, const rk45::Vec<4>& p) {
        const BicState d = rhs_bic(s, BicState{p[0], p[1], p[2], p[3]}, v, eps);
        return rk45::Vec<4>{d.u, d.w, d.x, d.y};
    };
    const rk45::Vec<4> y0{-0.3, 1.0, 1.0, 0.1};

    auto endpoint = [&](double fixed_step) {
        rk45::Options opt;
        opt.fixed_step = fixed_step;
        opt.max_step = fixed_step;
        rk45::Vec<4> last{};
        rk45::drive<4>(rhs, 0.0, 0.4, y0, opt,
                       [&](double, const rk45::Vec<4>&, const rk45::Vec<4>&, double,
                           const rk45::Vec<4>& yb, const rk45::Vec<4>&) {
                           last = yb;
                           return rk45::StepDecision::Continue;
                       });
        return last;
    };

    rk45::Options ref_opt;
    ref_opt.abs_tol = ref_opt.rel_tol = 1e-14;
    rk45::Vec<4> ref{};
    rk45::drive<4>(rhs, 0.0, 0.4, y0, ref_opt,
                   [&](double, const rk45::Vec<4>&, const rk45::Vec<4>&, double,
                       const rk45::Vec<4>& yb, const rk45::Vec<4>&) {
                       ref = yb;
                       return rk45::StepDecision::Continue;
                   });

    auto err_of = [&](double h) {
        const auto y = endpoint(h);
        double e = 0.0;
        for (int i = 0; i < 4; ++i) e = std::max(e, std::abs(y[i] - ref[i]));
        return e;
    };
    const double eH = err_of(0.02);
    const double eh = err_of(0.01);
    CHECK(eH / eh > 16.0);  // order >= 4; the pair propagates at order 5
}

TEST_CASE("reversal symmetry: v~(s) = -v(-s) mirrors the trajectory") {
    const Epsilon eps{0.5};
    const NormalProfile v = NormalProfile::polynomial({1.0, 0.3});
    auto spec = base_spec(SystemKind::Bic, BicState{-0.4, 1.0, 1.0, 0.1}, 0.0, 0.4);
    spec.eps = eps;
    spec.profile = v;
    const auto fwd = integrate(spec);
    REQUIRE(fwd.terminal.kind == TerminalKind::ReachedEnd);

    const auto end = dense_eval(fwd, 0.4);
    auto rspec = base_spec(SystemKind::Bic, BicState{-end[0], end[1], end[2], end[3]},
                           -0.4, 0.0);
    rspec.eps = eps;
    rspec.profile = v.reversed();
    const auto rev = integrate(rspec);
    REQUIRE(rev.terminal.kind == TerminalKind::ReachedEnd);

    for (int i = 1; i < 20; ++i) {
        const double st = -0.4 + 0.02 * i;  // tilde abscissa
        const auto a = dense_eval(rev, st);
        const auto b = dense_eval(fwd, -st);
        CHECK(a[0] == doctest::Approx(-b[0]).epsilon(1e-8));
        CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-8));
        CHECK(a[2] == doctest::Approx(b[2]).epsilon(1e-8));
        CHECK(a[3] == doctest::Approx(b[3]).epsilon(1e-8));
    }
}

TEST_CASE("backward integration emits strictly decreasing samples") {
    auto spec = base_spec(SystemKind::Pnmc, PnmcState{0.5, 1.0, 1.0}, 0.0, -0.3);
    const auto traj = integrate(spec);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        CHECK(traj.samples[i].s < traj.samples[i - 1].s);
    }
}

TEST_CASE("gauss residual stays near zero along a constraint-consistent run") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double eps = 0.0;
    const double u = 0.4, w = 1.0 + 0.1 * dist(rng), x = 1.0, y = 0.2;
    const double k = eps + y * (2.0 * w - y) - x * x;
    auto spec = base_spec(SystemKind::BicK, BicKState{u, w, x, y, k}, 0.0, 0.6);
    spec.profile = NormalProfile::constant(1.0);
    const auto traj = integrate(spec);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);
    for (const auto& smp : traj.samples) {
        CHECK(std::abs(smp.diag.gauss_residual) < 1e-8);
    }
}

}  // TEST_SUITE
