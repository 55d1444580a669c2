#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "bicons/families.hpp"
#include "bicons/integrate.hpp"
#include "bicons/systems.hpp"
#include "bicons/verify.hpp"
#include "specs.hpp"

namespace bicons::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json json_number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

/// Output sink: '-' means stdout; everything else is a file path.
class Sink {
public:
    explicit Sink(const std::string& target) {
        if (target != "-" && !target.empty()) {
            file_.open(target, std::ios::out | std::ios::trunc);
            if (!file_) throw InvalidParameter("cannot open output file '" + target + "'");
            out_ = &file_;
        } else {
            out_ = &std::cout;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_ = nullptr;
};

void write_json(const std::string& target, const json& doc) {
    if (target.empty()) return;
    Sink sink(target);
    sink.stream() << doc.dump(2) << "\n";
}

std::pair<double, double> parse_pair(const std::string& text, char sep,
                                     const std::string& context) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos) {
        throw InvalidParameter("expected '" + context + "' as a:b, got '" + text + "'");
    }
    const auto nums = parse_csv_doubles(text.substr(0, pos) + "," + text.substr(pos + 1));
    return {nums[0], nums[1]};
}

template <class Fn>
int guarded(std::ostream& diag, Fn&& fn) {
    try {
        return fn();
    } catch (const NoAdmissibleRange& e) {
        diag << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidParameter& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    } catch (const PreconditionError& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        diag << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

int cmd_integrate(const IntegrateConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&]() -> int {
        const SystemKind kind = system_from_name(cfg.system);
        const auto ic = parse_csv_doubles(cfg.ic);
        if (static_cast<int>(ic.size()) != state_dim(kind)) {
            throw InvalidParameter("system '" + cfg.system + "' needs " +
                                   std::to_string(state_dim(kind)) + " IC values");
        }
        const auto [s0, s1] = parse_pair(cfg.range, ':', "range");

        IntegrationSpec spec;
        spec.system = kind;
        spec.s0 = s0;
        spec.s_end = s1;
        spec.initial_state = unpack_state(kind, ic);
        spec.eps = Epsilon{cfg.epsilon};
        spec.tol =
            ToleranceConfig{cfg.abs_tol, cfg.rel_tol, cfg.constraint_tol,
                            cfg.residual_tol, cfg.domain_margin};
        spec.max_steps = cfg.max_steps;
        spec.sample_stride = cfg.stride;
        const bool needs_profile = kind == SystemKind::Bic || kind == SystemKind::BicK;
        if (needs_profile) {
            if (cfg.profile.empty()) throw InvalidParameter("system requires --profile");
            spec.profile = parse_profile_spec(cfg.profile, cfg.epsilon);
        } else if (!cfg.profile.empty()) {
            throw InvalidParameter("system '" + cfg.system + "' does not take a profile");
        }

        const Trajectory traj = integrate(spec);

        Sink sink(cfg.out);
        auto& os = sink.stream();
        double max_gauss = 0.0, max_bih = 0.0, min_margin = kNaN;
        switch (kind) {
            case SystemKind::Bic: os << "s,u,w,x,y,omega_margin\n"; break;
            case SystemKind::BicK: os << "s,u,w,x,y,k,gauss_residual,omega_margin\n"; break;
            case SystemKind::Pnmc: os << "s,u,x,y,omega_margin\n"; break;
            case SystemKind::Bih: os << "s,u,w,x,y,v,z,bih_residual,omega_margin\n"; break;
        }
        for (const auto& smp : traj.samples) {
            os << fmt(smp.s);
            switch (kind) {
                case SystemKind::Bic:
                    for (int i = 0; i < 4; ++i) os << "," << fmt(smp.state[i]);
                    break;
                case SystemKind::BicK:
                    for (int i = 0; i < 5; ++i) os << "," << fmt(smp.state[i]);
                    os << "," << fmt(smp.diag.gauss_residual);
                    max_gauss = std::max(max_gauss, std::abs(smp.diag.gauss_residual));
                    break;
                case SystemKind::Pnmc:
                    for (int i = 0; i < 3; ++i) os << "," << fmt(smp.state[i]);
                    break;
                case SystemKind::Bih:
                    // packed order (u, v, w, x, y, z) -> columns u,w,x,y,v,z
                    os << "," << fmt(smp.state[0]) << "," << fmt(smp.state[2]) << ","
                       << fmt(smp.state[3]) << "," << fmt(smp.state[4]) << ","
                       << fmt(smp.state[1]) << "," << fmt(smp.state[5]);
                    os << "," << fmt(smp.diag.bih_residual);
                    max_bih = std::max(max_bih, std::abs(smp.diag.bih_residual));
                    break;
            }
            os << "," << fmt(smp.diag.omega_margin) << "\n";
            min_margin = std::isnan(min_margin)
                             ? smp.diag.omega_margin
                             : std::min(min_margin, smp.diag.omega_margin);
        }

        int exit_code = 0;
        switch (traj.terminal.kind) {
            case TerminalKind::ReachedEnd: exit_code = 0; break;
            case TerminalKind::DomainExit: exit_code = 2; break;
            default: exit_code = 3; break;
        }

        json summary = {
            {"system", cfg.system},
            {"epsilon", cfg.epsilon},
            {"s0", s0},
            {"s_end", s1},
            {"samples", traj.samples.size()},
            {"terminal",
             {{"kind", terminal_name(traj.terminal.kind)},
              {"condition", traj.terminal.condition},
              {"s_exit", traj.terminal.s_exit}}},
            {"max_abs_gauss_residual",
             kind == SystemKind::BicK ? json(max_gauss) : json(nullptr)},
            {"max_abs_bih_residual",
             kind == SystemKind::Bih ? json(max_bih) : json(nullptr)},
            {"min_omega_margin", json_number_or_null(min_margin)},
            {"exit_code", exit_code},
        };
        write_json(cfg.summary, summary);
        return exit_code;
    });
}

// ---------------------------------------------------------------------------
// family
// ---------------------------------------------------------------------------

int cmd_family(const FamilyConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&]() -> int {
        const FamilyId id = family_from_name(cfg.family);
        if (cfg.grid < 1) throw InvalidParameter("grid must be >= 1");
        const FamilyParams params =
            make_family_params(id, Epsilon{cfg.epsilon}, cfg.c, cfg.C, cfg.c2);
        const ChartBounds b = family_bounds(id, params);

        Sink sink(cfg.out);
        auto& os = sink.stream();
        os << "chart,u,v,w,x,y,k,res1,res2,res3,res4,res5,bih_poly,bih_residual\n";

        const bool has_poly = family_has_obstruction_poly(id);
        double max_res = 0.0, max_so = 0.0;
        double min_poly = kNaN, min_bih = std::numeric_limits<double>::infinity();
        for (int i = 0; i < cfg.grid; ++i) {
            const double chart = b.lo + (b.hi - b.lo) * (i + 1) / (cfg.grid + 1);
            const FamilyPoint pt = eval_family(id, params, chart);
            const auto res = family_system_residual(id, params, chart);
            const double so = second_order_residual(id, params, chart);
            const double poly = has_poly ? family_obstruction_poly(id, params, chart) : kNaN;
            const double bih = bih_sixth_eq_residual(id, params, chart);
            os << fmt(chart) << "," << fmt(pt.u) << "," << fmt(pt.v) << "," << fmt(pt.w)
               << "," << fmt(pt.x) << "," << fmt(pt.y) << "," << fmt(pt.k);
            for (double r : res) {
                os << "," << fmt(r);
                max_res = std::max(max_res, std::abs(r));
            }
            os << "," << fmt(poly) << "," << fmt(bih) << "\n";
            max_so = std::max(max_so, std::abs(so));
            if (has_poly) {
                min_poly = std::isnan(min_poly) ? std::abs(poly)
                                                : std::min(min_poly, std::abs(poly));
            }
            min_bih = std::min(min_bih, std::abs(bih));
        }

        json summary = {
            {"family", cfg.family},
            {"epsilon", cfg.epsilon},
            {"c", cfg.c},
            {"C", cfg.C},
            {"c2", cfg.c2 ? json(*cfg.c2) : json(nullptr)},
            {"bounds", {{"lo", b.lo}, {"hi", b.hi}}},
            {"grid", cfg.grid},
            {"max_abs_system_residual", max_res},
            {"max_abs_second_order_residual", max_so},
            {"min_abs_poly", json_number_or_null(min_poly)},
            {"min_abs_bih_residual", min_bih},
        };
        write_json(cfg.summary, summary);
        return 0;
    });
}

// ---------------------------------------------------------------------------
// pnmc
// ---------------------------------------------------------------------------

int cmd_pnmc(const PnmcConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&]() -> int {
        const UProfile u = parse_u_spec(cfg.u, cfg.epsilon);
        const Epsilon eps{cfg.epsilon};
        const Interval valid = u.validity();
        if (!valid.contains(cfg.s0)) {
            throw InvalidParameter("s0 lies outside the u-profile's validity interval");
        }

        Interval win;
        if (!cfg.interval.empty()) {
            const auto [lo, hi] = parse_pair(cfg.interval, ':', "interval");
            win = Interval{lo, hi};
            if (win.empty() || !valid.contains(win.lo) || !valid.contains(win.hi)) {
                throw InvalidParameter("interval must be nonempty and inside validity");
            }
        } else {
            win = Interval{std::max(valid.lo, cfg.s0 - 0.4),
                           std::min(valid.hi, cfg.s0 + 0.4)};
        }

        const PnmcConstants consts = pnmc_constants(u, cfg.s0, eps);

        double compat_max = 0.0;
        const int n = 201;
        for (int i = 0; i < n; ++i) {
            const double s = win.lo + (win.hi - win.lo) * i / (n - 1);
            compat_max = std::max(compat_max, std::abs(pnmc_compat_residual(u, s, eps)));
        }

        ToleranceConfig tol;
        tol.constraint_tol = cfg.constraint_tol;
        tol.residual_tol = cfg.residual_tol;

        double beta_max = kNaN;
        std::optional<PnmcInitialCondition> ic;
        if (!cfg.beta_ic.empty()) {
            const auto vals = parse_csv_doubles(cfg.beta_ic);
            if (vals.size() != 2) throw InvalidParameter("beta-ic needs x0,y0");
            ic = PnmcInitialCondition{cfg.s0, vals[0], vals[1]};
        } else if (consts.realizable) {
            ic = PnmcInitialCondition{cfg.s0, std::sqrt(consts.c1_sq),
                                      std::sqrt(consts.c2_sq)};
        }
        if (ic) {
            const ResidualReport rep = pnmc_beta_check(u, *ic, eps, win, tol);
            beta_max = rep.find("beta")->max_abs;
        }

        json report = {
            {"u", cfg.u},
            {"epsilon", cfg.epsilon},
            {"s0", cfg.s0},
            {"interval", {{"lo", win.lo}, {"hi", win.hi}}},
            {"c1_sq", consts.c1_sq},
            {"c2_sq", consts.c2_sq},
            {"realizable", consts.realizable},
            {"compat_residual_max", compat_max},
            {"beta_max", json_number_or_null(beta_max)},
        };
        Sink sink(cfg.out);
        sink.stream() << report.dump(2) << "\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

namespace {

struct ScanCase {
    FamilyId id;
    double eps;
    double c;
    std::optional<double> c2;
    double C;
};

void append_cases(std::vector<ScanCase>& out, FamilyId id, double eps) {
    auto push = [&](double c, std::optional<double> c2, double C) {
        out.push_back(ScanCase{id, eps, c, c2, C});
    };
    switch (id) {
        case FamilyId::YZero:
            for (double c : {0.5, 1.0, 2.0, 4.0})
                for (double C : {3.0, 4.0, 6.0, 8.0, 16.0}) push(c, std::nullopt, C);
            break;
        case FamilyId::KEqualsEpsilon:
            for (double c : {0.25, 0.5, 1.0, 2.0})
                for (double C : {3.0, 4.0, 6.0, 8.0, 16.0}) push(c, std::nullopt, C);
            break;
        case FamilyId::GeneralPlus:
            for (double c : {0.5, 1.0})
                for (double c2 : {0.5, 1.0})
                    for (double C : {4.0, 6.0, 8.0, 16.0, 32.0}) push(c, c2, C);
            break;
        case FamilyId::GeneralMinus:
            for (double c : {0.5, 1.0})
                for (double c2 : {-0.5, 0.5})
                    for (double C : {3.0, 4.0, 8.0, 16.0, 32.0}) push(c, c2, C);
            break;
        case FamilyId::ThreeF2:
            for (double c : {-0.5, -1.0, -2.0, -4.0})
                for (double C : {18.0, 24.0, 32.0, 48.0, 64.0}) push(c, std::nullopt, C);
            break;
    }
}

std::string scan_row(const ScanCase& cs, int grid) {
    std::ostringstream os;
    os << family_name(cs.id) << "," << fmt(cs.eps) << "," << fmt(cs.c) << ","
       << (cs.c2 ? fmt(*cs.c2) : std::string()) << "," << fmt(cs.C) << ",";
    FamilyParams params;
    ChartBounds b{};
    try {
        params = make_family_params(cs.id, Epsilon{cs.eps}, cs.c, cs.C, cs.c2);
        b = family_bounds(cs.id, params);
    } catch (const NoAdmissibleRange&) {
        os << ",,," << grid << ",,,empty-bounds";
        return os.str();
    }
    const bool has_poly = family_has_obstruction_poly(cs.id);
    double min_poly = std::numeric_limits<double>::infinity(), max_poly = 0.0;
    double min_res = std::numeric_limits<double>::infinity(), max_res = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double chart = b.lo + (b.hi - b.lo) * (i + 1) / (grid + 1);
        if (has_poly) {
            const double p = std::abs(family_obstruction_poly(cs.id, params, chart));
            min_poly = std::min(min_poly, p);
            max_poly = std::max(max_poly, p);
        }
        const double r = std::abs(bih_sixth_eq_residual(cs.id, params, chart));
        min_res = std::min(min_res, r);
        max_res = std::max(max_res, r);
    }
    const double poly_norm = has_poly ? (max_poly > 0.0 ? min_poly / max_poly : 0.0) : kNaN;
    const double res_norm = max_res > 0.0 ? min_res / max_res : 0.0;
    const bool flagged = (has_poly && !(poly_norm > 1e-12)) || !(res_norm > 1e-12);
    os << fmt(b.lo) << "," << fmt(b.hi) << "," << grid << ","
       << (has_poly ? fmt(poly_norm) : std::string()) << "," << fmt(res_norm) << ","
       << (flagged ? "zero-inside" : "ok");
    return os.str();
}

int scan_thread_count(int configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("BICONSERVE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int cmd_scan(const ScanConfig& cfg, std::ostream& diag) {
    return guarded(diag, [&]() -> int {
        if (cfg.grid < 2) throw InvalidParameter("grid must be >= 2");
        std::vector<FamilyId> ids;
        if (cfg.families.empty()) {
            ids = {FamilyId::YZero, FamilyId::KEqualsEpsilon, FamilyId::GeneralPlus,
                   FamilyId::GeneralMinus, FamilyId::ThreeF2};
        } else {
            for (const auto& name : cfg.families) ids.push_back(family_from_name(name));
        }
        const auto eps_values = parse_csv_doubles(cfg.eps_list);

        std::vector<ScanCase> cases;
        for (FamilyId id : ids) {
            for (double eps : eps_values) append_cases(cases, id, eps);
        }

        // Parallel evaluation with deterministic output ordering: results are
        // buffered per case and emitted in grid order.
        const int threads = scan_thread_count(cfg.threads);
        std::vector<std::string> rows(cases.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cases.size()) break;
                rows[i] = scan_row(cases[i], cfg.grid);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        Sink sink(cfg.out);
        auto& os = sink.stream();
        os << "family,eps,c,c2,C,lo,hi,grid,min_poly_norm,min_resid_norm,status\n";
        for (const auto& row : rows) os << row << "\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// CLI front end
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"biconserve: integrates and cross-verifies the first-order systems of "
                 "non-CMC biconservative Weingarten surfaces with flat normal bundle"};
    app.require_subcommand(1);
    app.set_config("--config")->description("TOML run configuration (flags override)");

    IntegrateConfig icfg;
    auto* integ = app.add_subcommand("integrate", "integrate one of the four systems");
    integ->add_option("--system", icfg.system, "bic|bick|pnmc|bih")->capture_default_str();
    integ->add_option("--epsilon", icfg.epsilon, "ambient sectional curvature")
        ->capture_default_str();
    integ->add_option("--ic", icfg.ic, "comma-separated initial state")->required();
    integ->add_option("--profile", icfg.profile, "normal-connection profile spec");
    integ->add_option("--range", icfg.range, "s0:s_end")->capture_default_str();
    integ->add_option("--stride", icfg.stride, "max sample spacing")->capture_default_str();
    integ->add_option("--abs-tol", icfg.abs_tol)->capture_default_str();
    integ->add_option("--rel-tol", icfg.rel_tol)->capture_default_str();
    integ->add_option("--constraint-tol", icfg.constraint_tol)->capture_default_str();
    integ->add_option("--residual-tol", icfg.residual_tol)->capture_default_str();
    integ->add_option("--domain-margin", icfg.domain_margin)->capture_default_str();
    integ->add_option("--max-steps", icfg.max_steps)->capture_default_str();
    integ->add_option("--out", icfg.out, "CSV output path ('-' = stdout)")
        ->capture_default_str();
    integ->add_option("--summary", icfg.summary, "JSON summary path");

    FamilyConfig fcfg;
    double fc2 = 0.0;
    auto* fam = app.add_subcommand("family", "evaluate a closed-form family on a grid");
    fam->add_option("--family", fcfg.family,
                    "y-zero|k-eps|general-plus|general-minus|three-f2")
        ->capture_default_str();
    fam->add_option("--epsilon", fcfg.epsilon)->capture_default_str();
    fam->add_option("--C", fcfg.C, "first-integral constant")->capture_default_str();
    fam->add_option("--c", fcfg.c, "family constant (c or c1)")->capture_default_str();
    auto* c2opt = fam->add_option("--c2", fc2, "second constant (General pair)");
    fam->add_option("--grid", fcfg.grid, "interior grid points")->capture_default_str();
    fam->add_option("--out", fcfg.out)->capture_default_str();
    fam->add_option("--summary", fcfg.summary);

    PnmcConfig pcfg;
    auto* pnmc = app.add_subcommand("pnmc", "PNMC constants, compatibility and beta checks");
    pnmc->add_option("--u", pcfg.u, "u-profile spec")->capture_default_str();
    pnmc->add_option("--epsilon", pcfg.epsilon)->capture_default_str();
    pnmc->add_option("--s0", pcfg.s0, "base point")->capture_default_str();
    pnmc->add_option("--interval", pcfg.interval, "lo:hi check window");
    pnmc->add_option("--beta-ic", pcfg.beta_ic, "x0,y0 for the beta check");
    pnmc->add_option("--constraint-tol", pcfg.constraint_tol)->capture_default_str();
    pnmc->add_option("--residual-tol", pcfg.residual_tol)->capture_default_str();
    pnmc->add_option("--out", pcfg.out, "JSON report path ('-' = stdout)")
        ->capture_default_str();

    ScanConfig scfg;
    auto* scan = app.add_subcommand("scan", "non-biharmonicity evidence sweep");
    scan->add_option("--family", scfg.families, "restrict to listed families")
        ->delimiter(',');
    scan->add_option("--eps-list", scfg.eps_list, "comma-separated epsilon values")
        ->capture_default_str();
    scan->add_option("--grid", scfg.grid, "interior chart grid points")
        ->capture_default_str();
    scan->add_option("--out", scfg.out)->capture_default_str();
    scan->add_option("--threads", scfg.threads, "0 = BICONSERVE_THREADS or hardware");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (integ->parsed()) return cmd_integrate(icfg, std::cerr);
    if (fam->parsed()) {
        if (c2opt->count() > 0) fcfg.c2 = fc2;
        return cmd_family(fcfg, std::cerr);
    }
    if (pnmc->parsed()) return cmd_pnmc(pcfg, std::cerr);
    if (scan->parsed()) return cmd_scan(scfg, std::cerr);
    return 1;
}

}  // namespace bicons::cli
