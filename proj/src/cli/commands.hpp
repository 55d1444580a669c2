#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bicons::cli {

// Run configurations mirror the CLI flags one-to-one; every numeric field is
// validated against the target module's invariants before execution. Flags
// override values read from a TOML config file (CLI11 config semantics).
// List-valued fields are flat strings ("a,b,c" or "lo:hi") so that negative
// numbers survive flag parsing.

struct IntegrateConfig {
    std::string system = "bic";
    double epsilon = 0.0;
    std::string ic;               // comma-separated state fields
    std::string profile;          // const:<v> | poly:... | table:... | family:...
    std::string range = "0:1";    // s0:s_end
    double stride = 0.01;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double constraint_tol = 1e-8;
    double residual_tol = 1e-8;
    double domain_margin = 1e-9;
    long max_steps = 200000;
    std::string out = "-";
    std::string summary;
};

struct FamilyConfig {
    std::string family = "y-zero";
    double epsilon = 0.0;
    double C = 1.0;
    double c = 1.0;
    std::optional<double> c2;
    int grid = 50;
    std::string out = "-";
    std::string summary;
};

struct PnmcConfig {
    std::string u = "const:1";
    double epsilon = 0.0;
    double s0 = 0.0;
    std::string interval;  // lo:hi (defaults to s0 +/- 0.4 clipped to validity)
    std::string beta_ic;   // x0,y0 (derived from the constants when empty)
    double constraint_tol = 1e-8;
    double residual_tol = 1e-8;
    std::string out = "-";
};

struct ScanConfig {
    std::vector<std::string> families;  // empty means all five
    std::string eps_list = "-1,0,1";
    int grid = 64;
    std::string out = "-";
    int threads = 0;  // 0: BICONSERVE_THREADS env or hardware concurrency
};

// Exit codes: 0 success, 1 config/validation error, 2 empty or degenerate
// geometry (domain exit, no admissible range), 3 numerical failure.
int cmd_integrate(const IntegrateConfig& cfg, std::ostream& diag);
int cmd_family(const FamilyConfig& cfg, std::ostream& diag);
int cmd_pnmc(const PnmcConfig& cfg, std::ostream& diag);
int cmd_scan(const ScanConfig& cfg, std::ostream& diag);

int main(int argc, char** argv);

}  // namespace bicons::cli
