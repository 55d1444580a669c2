#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "bicons/families.hpp"
#include "bicons/integrate.hpp"
#include "bicons/systems.hpp"
#include "bicons/u_profile.hpp"
#include "bicons/verify.hpp"

using namespace bicons;

namespace {

Trajectory integrate_bic_sample(Epsilon eps, const BicState& ic, double s1) {
    IntegrationSpec spec;
    spec.system = SystemKind::Bic;
    spec.s0 = 0.0;
    spec.s_end = s1;
    spec.initial_state = ic;
    spec.eps = eps;
    spec.profile = NormalProfile::constant(1.0);
    return integrate(spec);
}

std::shared_ptr<Trajectory> integrate_pnmc(Epsilon eps, const PnmcState& ic, double s0,
                                           double s1) {
    IntegrationSpec spec;
    spec.system = SystemKind::Pnmc;
    spec.s0 = s0;
    spec.s_end = s1;
    spec.initial_state = ic;
    spec.eps = eps;
    spec.tol.abs_tol = spec.tol.rel_tol = 1e-12;
    spec.sample_stride = 1e-3;
    return std::make_shared<Trajectory>(integrate(spec));
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("codazzi residuals vanish along integrated trajectories") {
    const auto traj = integrate_bic_sample(Epsilon{0.5}, BicState{-0.4, 1.0, 1.0, 0.2}, 0.5);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);
    const auto rep = codazzi_residuals(traj, 1e-8);
    CHECK(rep.all_pass());
    CHECK(rep.find("e1_k1")->max_abs <= 1e-12);
    CHECK(rep.find("biconservativity")->max_abs <= 1e-12);
    CHECK(rep.find("e1_gauss") == nullptr);
}

TEST_CASE("codazzi residuals include the curvature row for bick") {
    IntegrationSpec spec;
    spec.system = SystemKind::BicK;
    spec.s0 = 0.0;
    spec.s_end = 0.5;
    const double eps = 0.0, y = 0.2, w = 1.0, x = 1.0;
    spec.initial_state = BicKState{0.4, w, x, y, eps + y * (2 * w - y) - x * x};
    spec.eps = Epsilon{eps};
    spec.profile = NormalProfile::constant(1.0);
    const auto traj = integrate(spec);
    REQUIRE(traj.terminal.kind == TerminalKind::ReachedEnd);
    const auto rep = codazzi_residuals(traj, 1e-8);
    CHECK(rep.all_pass());
    CHECK(rep.find("e1_gauss")->max_abs <= 1e-12);
}

TEST_CASE("codazzi residuals flag a corrupted sample") {
    auto traj = integrate_bic_sample(Epsilon{0.5}, BicState{-0.4, 1.0, 1.0, 0.2}, 0.5);
    traj.samples[traj.size() / 2].state[1] += 1.0;  // corrupt w
    const auto rep = codazzi_residuals(traj, 1e-8);
    CHECK_FALSE(rep.find("biconservativity")->pass);
}

TEST_CASE("codazzi rejects non-bic systems") {
    const auto traj = *integrate_pnmc(Epsilon{0}, PnmcState{0.5, 1.0, 1.0}, 0.0, 0.3);
    CHECK_THROWS_AS(codazzi_residuals(traj, 1e-8), InvalidParameter);
}

TEST_CASE("pnmc constants on constant profiles") {
    SUBCASE("u = 1, eps = -1 degenerates to exactly (0, 0)") {
        const auto c = pnmc_constants(UProfile::constant(1.0), 0.0, Epsilon{-1});
        CHECK(c.c1_sq == 0.0);
        CHECK(c.c2_sq == 0.0);
        CHECK_FALSE(c.realizable);
    }
    SUBCASE("u = 1, eps = 0 gives (-2, 9), non-realizable") {
        const auto c = pnmc_constants(UProfile::constant(1.0), 0.0, Epsilon{0});
        CHECK(c.c1_sq == doctest::Approx(-2.0));
        CHECK(c.c2_sq == doctest::Approx(9.0));
        CHECK_FALSE(c.realizable);
    }
    SUBCASE("u(s0) = 0 is an error") {
        CHECK_THROWS_AS(pnmc_constants(UProfile::constant(0.0), 0.0, Epsilon{0}),
                        PreconditionError);
    }
}

TEST_CASE("pnmc constants recover the generators of a synthetic solution") {
    const double c1 = 0.8, c2 = 1.1, u0 = 0.5;
    auto traj = integrate_pnmc(Epsilon{-1}, PnmcState{u0, c1, c2}, -0.2, 0.6);
    REQUIRE(traj->terminal.kind == TerminalKind::ReachedEnd);

    SUBCASE("system-derived derivatives recover them to roundoff") {
        const auto u = UProfile::pnmc_trajectory(traj);
        const auto c = pnmc_constants(u, 0.0, Epsilon{-1});
        CHECK(c.c1_sq == doctest::Approx(c1 * c1).epsilon(1e-10));
        CHECK(c.c2_sq == doctest::Approx(c2 * c2).epsilon(1e-10));
        CHECK(c.realizable);
    }
    SUBCASE("finite-difference derivatives recover them to 1e-6 relative") {
        auto dense_u = [traj](double s) { return dense_eval(*traj, s)[0]; };
        const auto u = UProfile::from_callable(dense_u, Interval{-0.2, 0.6}, 1e-3);
        const auto c = pnmc_constants(u, 0.0, Epsilon{-1});
        CHECK(c.c1_sq == doctest::Approx(c1 * c1).epsilon(1e-6));
        CHECK(c.c2_sq == doctest::Approx(c2 * c2).epsilon(1e-6));
    }
    SUBCASE("recovery at any base point returns the local squared state") {
        const auto u = UProfile::pnmc_trajectory(traj);
        const double s1 = 0.3;
        const auto st = dense_eval(*traj, s1);
        const auto c = pnmc_constants(u, s1, Epsilon{-1});
        CHECK(c.c1_sq == doctest::Approx(st[1] * st[1]).epsilon(1e-10));
        CHECK(c.c2_sq == doctest::Approx(st[2] * st[2]).epsilon(1e-10));
    }
}

TEST_CASE("pnmc compatibility residual closed-form values") {
    CHECK(pnmc_compat_residual(UProfile::constant(1.0), 0.0, Epsilon{-1}) ==
          doctest::Approx(0.0));
    CHECK(pnmc_compat_residual(UProfile::constant(1.0), 0.0, Epsilon{0}) ==
          doctest::Approx(-32.0));
    CHECK(pnmc_compat_residual(UProfile::constant(2.0), 0.0, Epsilon{-4}) ==
          doctest::Approx(0.0));
}

TEST_CASE("pnmc compatibility residual vanishes along integrated trajectories") {
    auto traj = integrate_pnmc(Epsilon{1}, PnmcState{0.4, 0.9, 1.2}, 0.0, 0.5);
    REQUIRE(traj->terminal.kind == TerminalKind::ReachedEnd);
    const auto u = UProfile::pnmc_trajectory(traj);
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double s = 0.5 * i / 100.0;
        worst = std::max(worst, std::abs(pnmc_compat_residual(u, s, Epsilon{1})));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("beta check") {
    const double c1 = 0.8, c2 = 1.1, u0 = 0.5;
    const Epsilon eps{-1};
    auto traj = integrate_pnmc(eps, PnmcState{u0, c1, c2}, -0.1, 0.6);
    REQUIRE(traj->terminal.kind == TerminalKind::ReachedEnd);
    const auto u = UProfile::pnmc_trajectory(traj);
    ToleranceConfig tol;

    SUBCASE("self-consistency on a full-system trajectory") {
        const auto rep = pnmc_beta_check(u, PnmcInitialCondition{0.0, c1, c2}, eps,
                                         Interval{-0.1, 0.6}, tol);
        CHECK(rep.all_pass());
        CHECK(rep.find("beta")->max_abs <= 10.0 * tol.constraint_tol);
    }
    SUBCASE("an initial condition off the constraints is a precondition error") {
        CHECK_THROWS_AS(pnmc_beta_check(u, PnmcInitialCondition{0.0, c1 + 1.0, c2}, eps,
                                        Interval{-0.1, 0.6}, tol),
                        PreconditionError);
    }
    SUBCASE("a u violating compatibility fails the report") {
        // Cubic perturbation keeps u, u', u'' at s0 (so the IC still passes)
        // but breaks the third-order compatibility combination.
        auto bent = [traj](double s) {
            return dense_eval(*traj, s)[0] + 0.05 * s * s * s;
        };
        const auto ub = UProfile::from_callable(bent, Interval{-0.1, 0.6}, 5e-3);
        const auto rep = pnmc_beta_check(ub, PnmcInitialCondition{0.0, c1, c2}, eps,
                                         Interval{-0.05, 0.55}, tol);
        CHECK_FALSE(rep.find("compat_residual")->pass);
        CHECK_FALSE(rep.find("beta")->pass);
        CHECK(rep.find("beta")->max_abs > 1e-4);
    }
}

TEST_CASE("obstruction polynomial values") {
    SUBCASE("y-zero polynomial") {
        CHECK(bih_poly_y_zero(1.0, 1.0, 1.0, Epsilon{0}) == doctest::Approx(21.0));
        CHECK(bih_poly_y_zero(0.0, 1.0, 1.0, Epsilon{0}) == doctest::Approx(0.0));
        CHECK(bih_poly_y_zero(1.0, 1.0, 3.0, Epsilon{1}) == doctest::Approx(25.0));
        CHECK_THROWS_AS(bih_poly_y_zero(1.0, -1.0, 1.0, Epsilon{0}), PreconditionError);
    }
    SUBCASE("k-eps polynomial") {
        CHECK(bih_poly_k_eps(1.0, 1.0, 1.0, Epsilon{0}) == doctest::Approx(45.0));
        CHECK(bih_poly_k_eps(1e-8, 1.0, 1.0, Epsilon{0}) == doctest::Approx(0.0));
        CHECK(bih_poly_k_eps(1.0, 1.0, 1.0, Epsilon{1}) == doctest::Approx(9.0));
    }
}

TEST_CASE("sixth-equation residual is proportional to the obstruction polynomial") {
    SUBCASE("y-zero: residual * F^3 / poly = -2/9 across the grid") {
        const auto p = make_family_params(FamilyId::YZero, Epsilon{0}, 1.0, 1.0);
        const auto b = family_bounds(FamilyId::YZero, p);
        double lo_ratio = 1e300, hi_ratio = -1e300;
        for (int i = 0; i < 50; ++i) {
            const double F = b.lo + (b.hi - b.lo) * (i + 1) / 51.0;
            const double res = bih_sixth_eq_residual(FamilyId::YZero, p, F);
            const double poly = bih_poly_y_zero(F, 1.0, 1.0, Epsilon{0});
            const double ratio = res * F * F * F / poly;
            lo_ratio = std::min(lo_ratio, ratio);
            hi_ratio = std::max(hi_ratio, ratio);
        }
        CHECK(lo_ratio == doctest::Approx(-2.0 / 9.0).epsilon(1e-9));
        CHECK((hi_ratio - lo_ratio) / std::abs(lo_ratio) <= 1e-6);
    }
    SUBCASE("k-eps: residual * (2 - c f) / poly = -1/(9c) across the grid") {
        const double c = 0.7;
        const auto p = make_family_params(FamilyId::KEqualsEpsilon, Epsilon{1}, c, 2.0);
        const auto b = family_bounds(FamilyId::KEqualsEpsilon, p);
        double lo_ratio = 1e300, hi_ratio = -1e300;
        for (int i = 0; i < 50; ++i) {
            const double f = b.lo + (b.hi - b.lo) * (i + 1) / 51.0;
            const double res = bih_sixth_eq_residual(FamilyId::KEqualsEpsilon, p, f);
            const double poly = bih_poly_k_eps(f, c, 2.0, Epsilon{1});
            const double ratio = res * (2.0 - c * f) / poly;
            lo_ratio = std::min(lo_ratio, ratio);
            hi_ratio = std::max(hi_ratio, ratio);
        }
        CHECK(lo_ratio == doctest::Approx(-1.0 / (9.0 * c)).epsilon(1e-9));
        CHECK((hi_ratio - lo_ratio) / std::abs(lo_ratio) <= 1e-6);
    }
}

TEST_CASE("y-zero obstruction keeps one sign inside the bounds (eps = 0, c = C = 1)") {
    // poly = c F^3 (5 F^7 - 2 C F^4 + 18 c^2 C): sign sweep over the interior
    const auto p = make_family_params(FamilyId::YZero, Epsilon{0}, 1.0, 1.0);
    const auto b = family_bounds(FamilyId::YZero, p);
    for (int i = 0; i < 200; ++i) {
        const double F = b.lo + (b.hi - b.lo) * (i + 1) / 201.0;
        CHECK(bih_poly_y_zero(F, 1.0, 1.0, Epsilon{0}) > 0.0);
    }
}

TEST_CASE("sixth-equation residual is nonzero for the non-polynomial families") {
    const std::vector<std::pair<FamilyId, FamilyParams>> cases = {
        {FamilyId::GeneralPlus,
         make_family_params(FamilyId::GeneralPlus, Epsilon{0}, 1.0, 4.0, 0.5)},
        {FamilyId::GeneralMinus,
         make_family_params(FamilyId::GeneralMinus, Epsilon{-1}, 1.0, 3.0, 0.5)},
        {FamilyId::ThreeF2,
         make_family_params(FamilyId::ThreeF2, Epsilon{1}, -1.0, 40.0)},
    };
    for (const auto& [id, p] : cases) {
        const auto b = family_bounds(id, p);
        double min_abs = 1e300, max_abs = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double chart = b.lo + (b.hi - b.lo) * (i + 1) / 65.0;
            const double r = std::abs(bih_sixth_eq_residual(id, p, chart));
            min_abs = std::min(min_abs, r);
            max_abs = std::max(max_abs, r);
        }
        CAPTURE(family_name(id));
        CHECK(max_abs > 0.0);
        CHECK(min_abs / max_abs > 1e-12);
    }
    CHECK_FALSE(family_has_obstruction_poly(FamilyId::GeneralPlus));
    CHECK_THROWS_AS(family_obstruction_poly(
                        FamilyId::ThreeF2,
                        make_family_params(FamilyId::ThreeF2, Epsilon{0}, -1.0, 17.0), 1.0),
                    InvalidParameter);
}

}  // TEST_SUITE
