#include "bicons/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bicons/rk45.hpp"

namespace bicons {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* terminal_name(TerminalKind k) {
    switch (k) {
        case TerminalKind::ReachedEnd: return "ReachedEnd";
        case TerminalKind::DomainExit: return "DomainExit";
        case TerminalKind::StepLimit: return "StepLimit";
        case TerminalKind::StepFailure: return "StepFailure";
    }
    return "?";
}

bool Trajectory::increasing() const {
    return samples.size() < 2 || samples[1].s > samples[0].s;
}

double Trajectory::s_min() const {
    return increasing() ? samples.front().s : samples.back().s;
}

double Trajectory::s_max() const {
    return increasing() ? samples.back().s : samples.front().s;
}

BicState Trajectory::bic_at(std::size_t i) const {
    const auto& v = samples[i].state;
    return BicState{v[0], v[1], v[2], v[3]};
}

BicKState Trajectory::bick_at(std::size_t i) const {
    const auto& v = samples[i].state;
    return BicKState{v[0], v[1], v[2], v[3], v[4]};
}

PnmcState Trajectory::pnmc_at(std::size_t i) const {
    const auto& v = samples[i].state;
    return PnmcState{v[0], v[1], v[2]};
}

BihState Trajectory::bih_at(std::size_t i) const {
    const auto& v = samples[i].state;
    return BihState{v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::vector<double> pack_state(const StateUnion& st) {
    return std::visit(
        [](const auto& s) -> std::vector<double> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BicState>) {
                return {s.u, s.w, s.x, s.y};
            } else if constexpr (std::is_same_v<T, BicKState>) {
                return {s.u, s.w, s.x, s.y, s.k};
            } else if constexpr (std::is_same_v<T, PnmcState>) {
                return {s.u, s.x, s.y};
            } else {
                return {s.u, s.v, s.w, s.x, s.y, s.z};
            }
        },
        st);
}

StateUnion unpack_state(SystemKind kind, const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != state_dim(kind)) {
        throw InvalidParameter("packed state has wrong dimension for system");
    }
    switch (kind) {
        case SystemKind::Bic: return BicState{p[0], p[1], p[2], p[3]};
        case SystemKind::BicK: return BicKState{p[0], p[1], p[2], p[3], p[4]};
        case SystemKind::Pnmc: return PnmcState{p[0], p[1], p[2]};
        case SystemKind::Bih: return BihState{p[0], p[1], p[2], p[3], p[4], p[5]};
    }
    throw InvalidParameter("unknown system kind");
}

namespace {

template <int N>
using Vec = rk45::Vec<N>;

template <int N>
std::vector<double> to_vector(const Vec<N>& v) {
    return std::vector<double>(v.begin(), v.end());
}

// System adapter: packs the typed interfaces into array form for the driver.
// `boundary` returns the signed domain-condition values (same order and
// names as the membership report); a sign change between consecutive samples
// marks a boundary crossing even when no sample lands near the boundary.
template <int N>
struct Hooks {
    std::function<Vec<N>(double, const Vec<N>&)> rhs;
    std::function<MembershipReport(const Vec<N>&, double)> membership;
    std::function<std::vector<double>(const Vec<N>&)> boundary;
    std::vector<std::string> boundary_names;
    std::function<SampleDiagnostics(double, const Vec<N>&)> diagnostics;
};

template <int N>
Trajectory run(const IntegrationSpec& spec, const Hooks<N>& hooks) {
    Trajectory traj;
    traj.system = spec.system;
    traj.eps = spec.eps;

    Vec<N> y0;
    {
        const auto packed = pack_state(spec.initial_state);
        if (static_cast<int>(packed.size()) != N) {
            throw InvalidParameter("initial state does not match the requested system");
        }
        std::copy(packed.begin(), packed.end(), y0.begin());
    }

    const auto initial = hooks.membership(y0, spec.tol.domain_margin);
    if (!initial.all_pass) {
        std::string bad;
        for (const auto& c : initial.conditions) {
            if (!c.pass) bad = c.name;
        }
        throw PreconditionError("initial state outside its domain (condition " + bad +
                                ") at margin " + std::to_string(spec.tol.domain_margin));
    }

    rk45::Options opt;
    opt.abs_tol = spec.tol.abs_tol;
    opt.rel_tol = spec.tol.rel_tol;
    opt.max_step = spec.sample_stride;
    opt.max_steps = spec.max_steps;

    std::vector<double> g_prev;
    auto emit = [&](double s, const Vec<N>& y, const Vec<N>& f) {
        TrajectorySample smp;
        smp.s = s;
        smp.state = to_vector<N>(y);
        smp.deriv = to_vector<N>(f);
        smp.diag = hooks.diagnostics(s, y);
        traj.samples.push_back(std::move(smp));
        g_prev = hooks.boundary(y);
    };

    {
        const Vec<N> f0 = hooks.rhs(spec.s0, y0);
        emit(spec.s0, y0, f0);
    }

    bool domain_exit = false;
    std::string exit_condition;
    double exit_s = spec.s0;

    auto emit_exit = [&](double sa, const Vec<N>& ya, const Vec<N>& fa, double sb,
                         const Vec<N>& yb, const Vec<N>& fb, double s_exit,
                         const std::string& condition) {
        const Vec<N> yexit = rk45::hermite<N>(sa, ya, fa, sb, yb, fb, s_exit);
        Vec<N> fexit{};
        try {
            fexit = hooks.rhs(s_exit, yexit);
        } catch (const Error&) {
            fexit.fill(kNaN);
        }
        TrajectorySample smp;
        smp.s = s_exit;
        smp.state = to_vector<N>(yexit);
        smp.deriv = to_vector<N>(fexit);
        try {
            smp.diag = hooks.diagnostics(s_exit, yexit);
        } catch (const Error&) {
            smp.diag = SampleDiagnostics{kNaN, kNaN, kNaN, kNaN};
        }
        traj.samples.push_back(std::move(smp));
        exit_condition = condition;
        exit_s = s_exit;
        domain_exit = true;
    };

    auto on_step = [&](double sa, const Vec<N>& ya, const Vec<N>& fa, double sb,
                       const Vec<N>& yb, const Vec<N>& fb) {
        // (1) Sign-change bracketing on the signed boundary functions: a
        // flipped sign means the step ran through a domain face (for example
        // u through 0) even if both endpoints pass the margin check.
        const auto gb = hooks.boundary(yb);
        int first_flip = -1;
        double first_s = 0.0;
        for (std::size_t j = 0; j < gb.size(); ++j) {
            if ((g_prev[j] > 0.0) == (gb[j] > 0.0)) continue;
            double lo = sa, hi = sb;
            while (std::abs(hi - lo) > spec.tol.abs_tol) {
                const double mid = 0.5 * (lo + hi);
                const Vec<N> ym = rk45::hermite<N>(sa, ya, fa, sb, yb, fb, mid);
                const double gm = hooks.boundary(ym)[j];
                if ((gm > 0.0) == (g_prev[j] > 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            const bool fwd = sb > sa;
            if (first_flip < 0 || (fwd ? hi < first_s : hi > first_s)) {
                first_flip = static_cast<int>(j);
                first_s = hi;
            }
        }
        if (first_flip >= 0) {
            emit_exit(sa, ya, fa, sb, yb, fb, first_s, hooks.boundary_names[first_flip]);
            return rk45::StepDecision::Stop;
        }

        // (2) Margin check at the accepted endpoint: bracket the boundary
        // approach by bisection on the smallest condition margin.
        const auto mb = hooks.membership(yb, spec.tol.domain_margin);
        if (mb.all_pass) {
            emit(sb, yb, fb);
            return rk45::StepDecision::Continue;
        }
        double lo = sa, hi = sb;
        while (std::abs(hi - lo) > spec.tol.abs_tol) {
            const double mid = 0.5 * (lo + hi);
            const Vec<N> ym = rk45::hermite<N>(sa, ya, fa, sb, yb, fb, mid);
            if (hooks.membership(ym, spec.tol.domain_margin).all_pass) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const Vec<N> ynear = rk45::hermite<N>(sa, ya, fa, sb, yb, fb, hi);
        const auto mexit = hooks.membership(ynear, spec.tol.domain_margin);
        std::string condition;
        for (const auto& c : mexit.conditions) {
            if (!c.pass) {
                condition = c.name;
                break;
            }
        }
        if (condition.empty()) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : mexit.conditions) {
                if (c.magnitude < best) {
                    best = c.magnitude;
                    condition = c.name;
                }
            }
        }
        emit_exit(sa, ya, fa, sb, yb, fb, hi, condition);
        return rk45::StepDecision::Stop;
    };

    const auto result = rk45::drive<N>(
        [&](double s, const Vec<N>& y) { return hooks.rhs(s, y); }, spec.s0,
        spec.s_end, y0, opt, on_step);

    if (domain_exit) {
        traj.terminal = Terminal{TerminalKind::DomainExit, exit_condition, exit_s};
    } else {
        switch (result.status) {
            case rk45::DriveStatus::ReachedEnd:
                traj.terminal = Terminal{TerminalKind::ReachedEnd, "", result.last_s};
                break;
            case rk45::DriveStatus::StepLimit:
                traj.terminal = Terminal{TerminalKind::StepLimit, "", result.last_s};
                break;
            default: {
                // Step-size underflow pinned against a domain boundary is a
                // boundary exit: the crossing happens below step resolution
                // (the gap closes like sqrt(s* - s) at the 3w - y pole), so
                // the event bisection can never observe it directly.
                const auto& last = traj.samples.back();
                Vec<N> ylast;
                std::copy(last.state.begin(), last.state.end(), ylast.begin());
                const auto m = hooks.membership(ylast, 0.0);
                if (m.min_margin < 1000.0 * spec.tol.domain_margin) {
                    std::string cond;
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto& c : m.conditions) {
                        if (c.magnitude < best) {
                            best = c.magnitude;
                            cond = c.name;
                        }
                    }
                    traj.terminal = Terminal{TerminalKind::DomainExit, cond, last.s};
                } else {
                    traj.terminal = Terminal{TerminalKind::StepFailure, "", result.last_s};
                }
                break;
            }
        }
    }
    return traj;
}

double min_margin_of(const MembershipReport& r) { return r.min_margin; }

}  // namespace

Trajectory integrate(const IntegrationSpec& spec) {
    spec.tol.validate();
    require_finite(spec.s0, "s0");
    require_finite(spec.s_end, "s_end");
    require_finite(spec.eps.value, "epsilon");
    if (spec.s_end == spec.s0) throw InvalidParameter("s_end must differ from s0");
    if (spec.max_steps <= 0) throw InvalidParameter("max_steps must be positive");
    if (!(spec.sample_stride > 0.0)) throw InvalidParameter("sample_stride must be positive");

    const bool needs_profile =
        spec.system == SystemKind::Bic || spec.system == SystemKind::BicK;
    if (needs_profile && !spec.profile.has_value()) {
        throw InvalidParameter("system requires a normal-connection profile v");
    }
    if (!needs_profile && spec.profile.has_value()) {
        throw InvalidParameter("system does not take a profile");
    }

    switch (spec.system) {
        case SystemKind::Bic: {
            Hooks<4> h;
            const NormalProfile v = *spec.profile;
            const Epsilon eps = spec.eps;
            h.rhs = [v, eps](double s, const Vec<4>& p) {
                const BicState st{p[0], p[1], p[2], p[3]};
                const BicState d = rhs_bic(s, st, v, eps);
                return Vec<4>{d.u, d.w, d.x, d.y};
            };
            h.membership = [](const Vec<4>& p, double m) {
                return omega_membership(BicState{p[0], p[1], p[2], p[3]}, m);
            };
            h.boundary = [eps](const Vec<4>& p) {
                return std::vector<double>{
                    p[0], p[1], p[2], 3.0 * p[1] - p[3],
                    3.0 * p[1] * p[1] + p[3] * (2.0 * p[1] - p[3]) - p[2] * p[2]};
            };
            h.boundary_names = {"u_nonzero", "w_positive", "x_positive",
                                "denom_3w_minus_y", "omega_second"};
            h.diagnostics = [v](double s, const Vec<4>& p) {
                SampleDiagnostics d;
                d.gauss_residual = kNaN;
                d.bih_residual = kNaN;
                d.omega_margin =
                    min_margin_of(omega_membership(BicState{p[0], p[1], p[2], p[3]}, 0.0));
                d.profile_value = v(s);
                return d;
            };
            return run<4>(spec, h);
        }
        case SystemKind::BicK: {
            Hooks<5> h;
            const NormalProfile v = *spec.profile;
            const Epsilon eps = spec.eps;
            h.rhs = [v, eps](double s, const Vec<5>& p) {
                const BicKState st{p[0], p[1], p[2], p[3], p[4]};
                const BicKState d = rhs_bic_k(s, st, v, eps);
                return Vec<5>{d.u, d.w, d.x, d.y, d.k};
            };
            h.membership = [eps](const Vec<5>& p, double m) {
                return omega_bar_membership(BicKState{p[0], p[1], p[2], p[3], p[4]}, eps, m);
            };
            h.diagnostics = [v, eps](double s, const Vec<5>& p) {
                const BicKState st{p[0], p[1], p[2], p[3], p[4]};
                SampleDiagnostics d;
                d.gauss_residual = gauss_constraint_residual(st, eps);
                d.bih_residual = kNaN;
                d.omega_margin = min_margin_of(omega_bar_membership(st, eps, 0.0));
                d.profile_value = v(s);
                return d;
            };
            return run<5>(spec, h);
        }
        case SystemKind::Pnmc: {
            Hooks<3> h;
            const Epsilon eps = spec.eps;
            h.rhs = [eps](double s, const Vec<3>& p) {
                const PnmcState st{p[0], p[1], p[2]};
                const PnmcState d = rhs_pnmc(s, st, eps);
                return Vec<3>{d.u, d.x, d.y};
            };
            h.membership = [](const Vec<3>& p, double m) {
                return pnmc_membership(PnmcState{p[0], p[1], p[2]}, m);
            };
            h.diagnostics = [](double, const Vec<3>& p) {
                SampleDiagnostics d;
                d.gauss_residual = kNaN;
                d.bih_residual = kNaN;
                d.omega_margin = min_margin_of(pnmc_membership(PnmcState{p[0], p[1], p[2]}, 0.0));
                d.profile_value = kNaN;
                return d;
            };
            return run<3>(spec, h);
        }
        case SystemKind::Bih: {
            Hooks<6> h;
            const Epsilon eps = spec.eps;
            h.rhs = [eps](double s, const Vec<6>& p) {
                const BihState st{p[0], p[1], p[2], p[3], p[4], p[5]};
                const BihState d = rhs_bih(s, st, eps);
                return Vec<6>{d.u, d.v, d.w, d.x, d.y, d.z};
            };
            h.membership = [](const Vec<6>& p, double m) {
                return bih_membership(BihState{p[0], p[1], p[2], p[3], p[4], p[5]}, m);
            };
            h.diagnostics = [](double, const Vec<6>& p) {
                const BihState st{p[0], p[1], p[2], p[3], p[4], p[5]};
                SampleDiagnostics d;
                d.gauss_residual = kNaN;
                d.bih_residual = bih_constraint_residual(st);
                d.omega_margin = min_margin_of(bih_membership(st, 0.0));
                d.profile_value = kNaN;
                return d;
            };
            return run<6>(spec, h);
        }
    }
    throw InvalidParameter("unknown system kind");
}

std::vector<double> dense_eval(const Trajectory& traj, double s) {
    require_finite(s, "dense_eval abscissa");
    if (traj.samples.empty()) throw PreconditionError("trajectory has no samples");
    if (s < traj.s_min() || s > traj.s_max()) {
        throw PreconditionError("dense_eval abscissa outside trajectory range");
    }
    const bool inc = traj.increasing();
    // Binary search for the bracketing pair in traversal order.
    std::size_t lo = 0, hi = traj.samples.size() - 1;
    auto before = [&](double a, double b) { return inc ? a <= b : a >= b; };
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (before(traj.samples[mid].s, s)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const auto& A = traj.samples[lo];
    const auto& B = traj.samples[hi];
    if (s == A.s) return A.state;
    if (s == B.s) return B.state;
    const double h = B.s - A.s;
    const double t = (s - A.s) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    std::vector<double> out(A.state.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = h00 * A.state[i] + h10 * h * A.deriv[i] + h01 * B.state[i] +
                 h11 * h * B.deriv[i];
    }
    return out;
}

}  // namespace bicons
