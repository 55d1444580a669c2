#pragma once

#include <memory>
#include <string>

#include "bicons/core.hpp"
#include "bicons/families.hpp"
#include "bicons/integrate.hpp"
#include "bicons/u_profile.hpp"

namespace bicons::cli {

/// Profile flag grammar:
///   const:<v>
///   poly:<c0>,<c1>,...
///   table:<path.csv>            (rows "s,value"; '#' comments skipped)
///   family:<id>:<k=v,...>       (keys C, c, c2, eps, chart0, smin, smax)
/// default_eps seeds the family variant's eps when the key is omitted.
NormalProfile parse_profile_spec(const std::string& spec, double default_eps);

/// u-profile flag grammar:
///   const:<v>
///   poly:<c0>,<c1>,...
///   riccati:<recip|tan|const+|const-|exp-outer|exp-inner>:<shift>
///   run:<u0>,<x0>,<y0>:<s0>:<s1>   (integrates the PNMC system internally)
UProfile parse_u_spec(const std::string& spec, double epsilon);

std::vector<double> parse_csv_doubles(const std::string& text);

}  // namespace bicons::cli
