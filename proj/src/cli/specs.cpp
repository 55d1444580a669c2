#include "specs.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace bicons::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep)) out.push_back(item);
    if (!text.empty() && text.back() == sep) out.push_back("");
    return out;
}

double to_double(const std::string& text, const std::string& context) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        throw InvalidParameter("cannot parse number '" + text + "' in " + context);
    }
    return v;
}

std::map<std::string, double> parse_kv(const std::string& text, const std::string& context) {
    std::map<std::string, double> kv;
    for (const auto& item : split(text, ',')) {
        const auto pos = item.find('=');
        if (pos == std::string::npos) {
            throw InvalidParameter("expected key=value in " + context + ", got '" + item + "'");
        }
        kv[item.substr(0, pos)] = to_double(item.substr(pos + 1), context);
    }
    return kv;
}

}  // namespace

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        out.push_back(to_double(item, "numeric list"));
    }
    return out;
}

NormalProfile parse_profile_spec(const std::string& spec, double default_eps) {
    const auto pos = spec.find(':');
    if (pos == std::string::npos) {
        throw InvalidParameter("profile spec needs a kind prefix, e.g. const:1 (got '" +
                               spec + "')");
    }
    const std::string kind = spec.substr(0, pos);
    const std::string rest = spec.substr(pos + 1);

    if (kind == "const") {
        return NormalProfile::constant(to_double(rest, "const profile"));
    }
    if (kind == "poly") {
        return NormalProfile::polynomial(parse_csv_doubles(rest));
    }
    if (kind == "table") {
        std::ifstream in(rest);
        if (!in) throw InvalidParameter("cannot open profile table '" + rest + "'");
        std::vector<std::pair<double, double>> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto cols = split(line, ',');
            if (cols.size() != 2) {
                throw InvalidParameter("profile table rows must be 's,value' (got '" +
                                       line + "')");
            }
            samples.emplace_back(to_double(cols[0], "table abscissa"),
                                 to_double(cols[1], "table value"));
        }
        return NormalProfile::tabulated(std::move(samples));
    }
    if (kind == "family") {
        const auto pos2 = rest.find(':');
        if (pos2 == std::string::npos) {
            throw InvalidParameter("family profile spec is family:<id>:<k=v,...>");
        }
        const FamilyId id = family_from_name(rest.substr(0, pos2));
        auto kv = parse_kv(rest.substr(pos2 + 1), "family profile");
        const Epsilon eps{kv.count("eps") ? kv["eps"] : default_eps};
        if (!kv.count("C") || !kv.count("c")) {
            throw InvalidParameter("family profile needs C= and c=");
        }
        std::optional<double> c2;
        if (kv.count("c2")) c2 = kv["c2"];
        const FamilyParams params = make_family_params(id, eps, kv["c"], kv["C"], c2);
        const ChartBounds b = family_bounds(id, params);
        const double chart0 =
            kv.count("chart0") ? kv["chart0"] : b.lo + 0.5 * (b.hi - b.lo);
        const double smin = kv.count("smin") ? kv["smin"] : -1.0;
        const double smax = kv.count("smax") ? kv["smax"] : 1.0;
        return FamilyFlow(id, params, chart0, smin, smax).profile();
    }
    throw InvalidParameter("unknown profile kind '" + kind +
                           "' (expected const|poly|table|family)");
}

UProfile parse_u_spec(const std::string& spec, double epsilon) {
    const auto pos = spec.find(':');
    if (pos == std::string::npos) {
        throw InvalidParameter("u spec needs a kind prefix, e.g. const:1 (got '" + spec +
                               "')");
    }
    const std::string kind = spec.substr(0, pos);
    const std::string rest = spec.substr(pos + 1);

    if (kind == "const") {
        return UProfile::constant(to_double(rest, "const u"));
    }
    if (kind == "poly") {
        return UProfile::polynomial(parse_csv_doubles(rest));
    }
    if (kind == "riccati") {
        const auto pos2 = rest.find(':');
        if (pos2 == std::string::npos) {
            throw InvalidParameter("riccati u spec is riccati:<branch>:<shift>");
        }
        const std::string branch = rest.substr(0, pos2);
        const double shift = to_double(rest.substr(pos2 + 1), "riccati shift");
        RiccatiBranch b;
        if (branch == "recip") b = RiccatiBranch::Reciprocal;
        else if (branch == "tan") b = RiccatiBranch::Tangent;
        else if (branch == "const+") b = RiccatiBranch::ConstantPositive;
        else if (branch == "const-") b = RiccatiBranch::ConstantNegative;
        else if (branch == "exp-outer") b = RiccatiBranch::ExpOuter;
        else if (branch == "exp-inner") b = RiccatiBranch::ExpInner;
        else throw InvalidParameter("unknown riccati branch '" + branch + "'");
        return solve_u_riccati(Epsilon{epsilon}, b, shift);
    }
    if (kind == "run") {
        const auto parts = split(rest, ':');
        if (parts.size() != 3) {
            throw InvalidParameter("run u spec is run:<u0>,<x0>,<y0>:<s0>:<s1>");
        }
        const auto ic = parse_csv_doubles(parts[0]);
        if (ic.size() != 3) throw InvalidParameter("run u spec needs three IC values");
        IntegrationSpec ispec;
        ispec.system = SystemKind::Pnmc;
        ispec.s0 = to_double(parts[1], "run s0");
        ispec.s_end = to_double(parts[2], "run s1");
        ispec.initial_state = PnmcState{ic[0], ic[1], ic[2]};
        ispec.eps = Epsilon{epsilon};
        ispec.tol.abs_tol = ispec.tol.rel_tol = 1e-12;
        ispec.sample_stride = 1e-3;
        auto traj = std::make_shared<Trajectory>(integrate(ispec));
        if (traj->terminal.kind != TerminalKind::ReachedEnd) {
            throw Error(std::string("PNMC generator run ended early (") +
                        terminal_name(traj->terminal.kind) + ")");
        }
        return UProfile::pnmc_trajectory(traj);
    }
    throw InvalidParameter("unknown u kind '" + kind +
                           "' (expected const|poly|riccati|run)");
}

}  // namespace bicons::cli
