#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bicons/core.hpp"
#include "cli/commands.hpp"
#include "cli/specs.hpp"
#include "schema_check.hpp"

namespace fs = std::filesystem;
using namespace bicons;
using namespace bicons::cli;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "biconserve_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += (c == '\n');
    return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("profile spec grammar") {
    const double eps = 0.0;
    CHECK(parse_profile_spec("const:2", eps)(5.0) == 2.0);
    CHECK(parse_profile_spec("poly:1,0.5", eps)(2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_profile_spec("const:zero", eps), InvalidParameter);
    CHECK_THROWS_AS(parse_profile_spec("sine:1", eps), InvalidParameter);
    CHECK_THROWS_AS(parse_profile_spec("noprefix", eps), InvalidParameter);

    const auto table = temp_dir() / "profile.csv";
    std::ofstream(table) << "# s,v\n0,1\n1,2\n";
    const auto p = parse_profile_spec("table:" + table.string(), eps);
    CHECK(p(0.5) == doctest::Approx(1.5));

    const auto fam = parse_profile_spec("family:y-zero:C=3,c=1,chart0=1,smin=-0.2,smax=0.2", 1.0);
    CHECK(fam(0.0) == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("u spec grammar") {
    CHECK(parse_u_spec("const:1", 0.0).u(3.0) == 1.0);
    CHECK(parse_u_spec("riccati:recip:1", 0.0).u(0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(parse_u_spec("riccati:tan:0", -1.0), InvalidParameter);
    const auto run = parse_u_spec("run:0.5,1,1:-0.1:0.4", 0.0);
    CHECK(run.u(0.0) > 0.0);
    CHECK_THROWS_AS(parse_u_spec("spline:1", 0.0), InvalidParameter);
}

TEST_CASE("cmd_integrate emits ordered CSV and exit codes") {
    const auto dir = temp_dir();
    IntegrateConfig cfg;
    cfg.system = "bic";
    cfg.epsilon = 0.0;
    cfg.ic = "1,1,1,0";
    cfg.profile = "const:1";
    cfg.range = "0:0.5";
    cfg.out = (dir / "fwd.csv").string();
    cfg.summary = (dir / "fwd.json").string();
    std::ostringstream diag;

    SUBCASE("forward range gives strictly increasing s") {
        CHECK(cmd_integrate(cfg, diag) == 0);
        std::ifstream in(cfg.out);
        std::string header;
        std::getline(in, header);
        CHECK(header == "s,u,w,x,y,omega_margin");
        double prev = -1e300;
        std::string line;
        int rows = 0;
        while (std::getline(in, line)) {
            const double s = std::stod(line.substr(0, line.find(',')));
            CHECK(s > prev);
            prev = s;
            ++rows;
        }
        CHECK(rows > 10);
        const auto summary = schema_check::load(cfg.summary);
        std::string err;
        CHECK_MESSAGE(schema_check::validate(
                          summary,
                          schema_check::load(std::string(BICONSERVE_SCHEMA_DIR) +
                                             "/integrate_summary.schema.json"),
                          err),
                      err);
    }
    SUBCASE("reversed range gives strictly decreasing s") {
        cfg.range = "0:-0.5";
        cfg.out = (dir / "bwd.csv").string();
        cfg.summary.clear();
        CHECK(cmd_integrate(cfg, diag) == 0);
        std::ifstream in(cfg.out);
        std::string line;
        std::getline(in, line);
        double prev = 1e300;
        while (std::getline(in, line)) {
            const double s = std::stod(line.substr(0, line.find(',')));
            CHECK(s < prev);
            prev = s;
        }
    }
    SUBCASE("IC outside Omega exits 1") {
        cfg.ic = "0,1,1,0";
        cfg.summary.clear();
        CHECK(cmd_integrate(cfg, diag) == 1);
        CHECK(line_count(diag.str()) == 1);
    }
    SUBCASE("domain exit exits 2") {
        cfg.ic = "1,1,1,2.9999";
        cfg.summary.clear();
        CHECK(cmd_integrate(cfg, diag) == 2);
    }
    SUBCASE("profile starving mid-run exits 3") {
        const auto table = dir / "short.csv";
        std::ofstream(table) << "0,1\n0.2,1\n";
        cfg.ic = "-0.3,1,1,0";
        cfg.profile = "table:" + table.string();
        cfg.summary.clear();
        CHECK(cmd_integrate(cfg, diag) == 3);
    }
}

TEST_CASE("cmd_family handles empty ranges and column layout") {
    const auto dir = temp_dir();
    std::ostringstream diag;
    FamilyConfig cfg;
    cfg.family = "y-zero";
    cfg.epsilon = 0.0;
    cfg.C = 1.0;
    cfg.c = 1.0;
    cfg.grid = 50;
    cfg.out = (dir / "yzero.csv").string();
    cfg.summary = (dir / "yzero.json").string();

    SUBCASE("50-row grid with residuals below 1e-9 and nonzero polynomial") {
        CHECK(cmd_family(cfg, diag) == 0);
        const auto text = slurp(cfg.out);
        CHECK(line_count(text) == 51);  // header + 50 rows
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        CHECK(line == "chart,u,v,w,x,y,k,res1,res2,res3,res4,res5,bih_poly,bih_residual");
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string cell;
            std::vector<double> cells;
            while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
            REQUIRE(cells.size() == 14);
            for (int i = 7; i < 12; ++i) CHECK(std::abs(cells[i]) <= 1e-9);
            CHECK(cells[12] != 0.0);
        }
        const auto summary = schema_check::load(cfg.summary);
        std::string err;
        CHECK_MESSAGE(schema_check::validate(
                          summary,
                          schema_check::load(std::string(BICONSERVE_SCHEMA_DIR) +
                                             "/family_summary.schema.json"),
                          err),
                      err);
    }
    SUBCASE("empty admissible range exits 2") {
        cfg.epsilon = 1.0;  // C^2 <= 4 eps
        CHECK(cmd_family(cfg, diag) == 2);
    }
    SUBCASE("general-minus with c2 = 0 matches y-zero after column alignment") {
        REQUIRE(cmd_family(cfg, diag) == 0);
        FamilyConfig gcfg = cfg;
        gcfg.family = "general-minus";
        gcfg.c2 = 0.0;
        gcfg.out = (dir / "gminus.csv").string();
        gcfg.summary.clear();
        REQUIRE(cmd_family(gcfg, diag) == 0);
        std::istringstream a(slurp(cfg.out)), b(slurp(gcfg.out));
        std::string la, lb;
        std::getline(a, la);
        std::getline(b, lb);
        while (std::getline(a, la) && std::getline(b, lb)) {
            // identical except for the bih_poly column (13th of 14)
            auto strip_poly = [](const std::string& line) {
                std::vector<std::string> cells;
                std::istringstream row(line);
                std::string cell;
                while (std::getline(row, cell, ',')) cells.push_back(cell);
                cells.erase(cells.begin() + 12);
                std::string out;
                for (const auto& c : cells) out += c + "|";
                return out;
            };
            CHECK(strip_poly(la) == strip_poly(lb));
        }
    }
}

TEST_CASE("cmd_pnmc reports constants and residuals") {
    const auto dir = temp_dir();
    std::ostringstream diag;
    PnmcConfig cfg;
    cfg.u = "const:1";
    cfg.epsilon = -1.0;
    cfg.s0 = 0.0;
    cfg.out = (dir / "pnmc.json").string();

    SUBCASE("constant u = 1, eps = -1 is degenerate but compatible") {
        CHECK(cmd_pnmc(cfg, diag) == 0);
        const auto rep = schema_check::load(cfg.out);
        CHECK(rep["c1_sq"].get<double>() == 0.0);
        CHECK(rep["c2_sq"].get<double>() == 0.0);
        CHECK_FALSE(rep["realizable"].get<bool>());
        CHECK(rep["compat_residual_max"].get<double>() == doctest::Approx(0.0));
        CHECK(rep["beta_max"].is_null());
        std::string err;
        CHECK_MESSAGE(schema_check::validate(
                          rep,
                          schema_check::load(std::string(BICONSERVE_SCHEMA_DIR) +
                                             "/pnmc_report.schema.json"),
                          err),
                      err);
    }
    SUBCASE("constant u = 1, eps = 0 reports the -32 compatibility defect") {
        cfg.epsilon = 0.0;
        CHECK(cmd_pnmc(cfg, diag) == 0);
        const auto rep = schema_check::load(cfg.out);
        CHECK(rep["compat_residual_max"].get<double>() == doctest::Approx(32.0));
        CHECK(rep["c1_sq"].get<double>() == doctest::Approx(-2.0));
    }
    SUBCASE("integrated run is realizable with tiny residuals") {
        cfg.u = "run:0.5,0.8,1.1:-0.1:0.5";
        cfg.interval = "0:0.4";
        CHECK(cmd_pnmc(cfg, diag) == 0);
        const auto rep = schema_check::load(cfg.out);
        CHECK(rep["realizable"].get<bool>());
        CHECK(rep["compat_residual_max"].get<double>() <= 1e-8);
        CHECK(rep["beta_max"].get<double>() <= 1e-7);
    }
    SUBCASE("u vanishing at s0 exits 1") {
        cfg.u = "poly:0,1";
        CHECK(cmd_pnmc(cfg, diag) == 1);
    }
}

TEST_CASE("cmd_scan flags nothing on the default grids") {
    const auto dir = temp_dir();
    std::ostringstream diag;
    ScanConfig cfg;
    cfg.families = {"y-zero", "three-f2"};
    cfg.eps_list = "0";
    cfg.grid = 16;
    cfg.out = (dir / "scan.csv").string();
    CHECK(cmd_scan(cfg, diag) == 0);
    std::istringstream in(slurp(cfg.out));
    std::string line;
    std::getline(in, line);
    CHECK(line == "family,eps,c,c2,C,lo,hi,grid,min_poly_norm,min_resid_norm,status");
    int rows = 0, ok_rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find("zero-inside") == std::string::npos);
        ok_rows += line.rfind(",ok") != std::string::npos;
    }
    CHECK(rows == 40);     // 20 parameter sets per family
    CHECK(ok_rows >= 38);  // at most a couple of empty-bounds rows
}

TEST_CASE("outputs are byte-identical across repeated runs") {
    const auto dir = temp_dir();
    std::ostringstream diag;

    IntegrateConfig icfg;
    icfg.system = "bick";
    icfg.epsilon = 1.0;
    icfg.ic = "0.4,1,1,0.2,1.4";  // k = eps + y(2w-y) - x^2 = 1 + 0.36 - 1 = 0.36
    icfg.profile = "const:1";
    icfg.range = "0:0.4";

    // constraint-consistent k for the IC above
    icfg.ic = "0.4,1,1,0.2,0.36";
    icfg.out = (dir / "det_a.csv").string();
    icfg.summary = (dir / "det_a.json").string();
    REQUIRE(cmd_integrate(icfg, diag) == 0);
    icfg.out = (dir / "det_b.csv").string();
    icfg.summary = (dir / "det_b.json").string();
    REQUIRE(cmd_integrate(icfg, diag) == 0);
    CHECK(slurp(dir / "det_a.csv") == slurp(dir / "det_b.csv"));
    auto a = slurp(dir / "det_a.json"), b = slurp(dir / "det_b.json");
    CHECK(a == b);

    ScanConfig scfg;
    scfg.families = {"k-eps"};
    scfg.eps_list = "-1,1";
    scfg.grid = 8;
    scfg.out = (dir / "scan_a.csv").string();
    REQUIRE(cmd_scan(scfg, diag) == 0);
    scfg.out = (dir / "scan_b.csv").string();
    scfg.threads = 3;  // ordering must not depend on parallelism
    REQUIRE(cmd_scan(scfg, diag) == 0);
    CHECK(slurp(dir / "scan_a.csv") == slurp(dir / "scan_b.csv"));
}

TEST_CASE("TOML config drives the front end and flags override it") {
    const auto dir = temp_dir();
    const auto cfgfile = dir / "run.toml";
    const auto out_toml = dir / "toml_out.csv";
    std::ofstream(cfgfile) << "[integrate]\n"
                              "system = \"bic\"\n"
                              "epsilon = 0.0\n"
                              "ic = \"1,1,1,0\"\n"
                              "profile = \"const:1\"\n"
                              "range = \"0:0.3\"\n"
                              "out = \"" << out_toml.string() << "\"\n";
    std::vector<std::string> args = {"biconserve", "integrate",
                                     "--config", cfgfile.string()};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    CHECK(bicons::cli::main(static_cast<int>(argv.size()), argv.data()) == 0);
    CHECK(fs::exists(out_toml));
    const auto base = slurp(out_toml);
    CHECK(line_count(base) > 5);

    // a flag overrides the file value
    const auto out_flag = dir / "flag_out.csv";
    std::vector<std::string> args2 = {"biconserve", "integrate", "--config",
                                      cfgfile.string(), "--out", out_flag.string(),
                                      "--range", "0:0.1"};
    std::vector<char*> argv2;
    for (auto& a : args2) argv2.push_back(a.data());
    CHECK(bicons::cli::main(static_cast<int>(argv2.size()), argv2.data()) == 0);
    CHECK(fs::exists(out_flag));
    CHECK(line_count(slurp(out_flag)) < line_count(base));
}

}  // TEST_SUITE
