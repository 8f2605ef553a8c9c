#include "drawdown/verify.hpp"

#include "drawdown/dual.hpp"
#include "drawdown/policy.hpp"
#include "drawdown/primal.hpp"
#include "drawdown/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace drawdown {

namespace {

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

bool near_knot(const DualSolution& sol, double z, double rel) {
    for (double k : sol.knots()) {
        if (std::abs(z - k) <= rel * k) return true;
    }
    return false;
}

// Solves -J'(z) = x on the first dual piece (x > a) by bisection in log z.
double bisect_first_piece(const DualSolution& sol, double x) {
    double lo = std::log(sol.z_a) - 60.0;
    double hi = std::log(sol.z_a);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (-eval_piece(sol, Region::Ratchet, std::exp(mid)).Jp > x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const ModelParams& params, const VerifyOptions& opt) {
    std::vector<CheckResult> out;
    auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };

    const auto sol = solve(params);
    const auto rb = region_boundaries(sol);
    const auto& p = sol.params;
    const double zmax = 1e6;

    {
        const double g = za_equation(sol.C, sol.derived, p, sol.z_a);
        const double tol = 1e-12 * std::max(1.0, sol.derived.alpha / p.rho);
        add("dual.za_residual", std::abs(g) <= tol && sol.z_a > 0.0 && sol.z_a < 1.0,
            "|g(z_a)| = " + sci(std::abs(g)) + ", z_a = " + sci(sol.z_a));
    }
    {
        double worst = 0.0;
        for (double z : log_grid(sol.z_a / 10.0, zmax, opt.grid_points)) {
            if (near_knot(sol, z, 1e-6)) continue;
            worst = std::max(worst, std::abs(ode_residual(sol, z)));
        }
        add("dual.ode_residual", worst <= 1e-9, "max residual " + sci(worst));
    }
    {
        double worst = 0.0;
        const std::array<std::pair<Region, Region>, 3> sides{{{Region::Ratchet, Region::RatchetWait},
                                                              {Region::RatchetWait, Region::Interior},
                                                              {Region::Interior, Region::DrawdownBound}}};
        const auto knots = sol.knots();
        for (std::size_t i = 0; i < 3; ++i) {
            const auto l = eval_piece(sol, sides[i].first, knots[i]);
            const auto r = eval_piece(sol, sides[i].second, knots[i]);
            worst = std::max({worst, std::abs(l.J - r.J) / std::max(1.0, std::abs(l.J)),
                              std::abs(l.Jp - r.Jp) / std::max(1.0, std::abs(l.Jp)),
                              std::abs(l.Jpp - r.Jpp) / std::max(1.0, std::abs(l.Jpp))});
        }
        add("dual.c2_matching", worst <= 1e-8, "max knot mismatch " + sci(worst));
    }
    {
        bool ok = true;
        double worst_sign = -1e300;
        for (double z : log_grid(sol.z_a * (1.0 + 1e-10), zmax, opt.grid_points)) {
            const auto v = eval_J(sol, z);
            ok = ok && v.Jpp > 0.0 && v.Jp < 0.0;
            const double s = sol.branch == UtilityBranch::Log ? 1.0 / p.rho + v.Jp * z
                                                               : (1.0 - p.R) * v.J + p.R * v.Jp * z;
            worst_sign = std::max(worst_sign, s / std::max(1.0, std::abs(v.J)));
        }
        add("dual.convexity", ok, "J'' > 0 and J' < 0 on [z_a, 1e6]");
        add("dual.cbar_monotone", worst_sign <= 1e-9, "max normalised V_cbar sign term " + sci(worst_sign));
    }
    {
        bool ok = true;
        double prev_curv = INFINITY, prev_gap = INFINITY;
        const double ub = utility(p, p.b) / p.rho;
        for (double z : {1e3, 1e4, 1e5, 1e6}) {
            const auto v = eval_J(sol, z);
            const double curv = std::abs(z * v.Jpp);
            const double gap = std::abs(v.J - (ub - p.b / p.r * z));
            ok = ok && curv < prev_curv && gap < prev_gap;
            prev_curv = curv;
            prev_gap = gap;
        }
        add("dual.tails", ok, "z J'' and J - (U(b)/rho - (b/r) z) decay over 1e3..1e6");
    }
    add("dual.boundaries", true,
        "b/r=" + sci(rb.x_floor) + " x_kink=" + sci(rb.x_kink) + " x_one=" + sci(rb.x_one) + " a=" + sci(rb.a));
    {
        double worst = 0.0;
        for (double z : log_grid(sol.z_a, 1e4, opt.grid_points)) {
            const double x = -eval_J(sol, z).Jp;
            const auto pt = invert_dual(sol, x);
            worst = std::max(worst, std::abs(pt.vp - z) / z);
        }
        add("primal.round_trip", worst <= 1e-8, "max relative z error " + sci(worst));
    }
    {
        double worst = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double x_low = rb.x_floor + (rb.x_kink - rb.x_floor) * i / 50.0;
            const double ex_low = *explicit_value(sol, x_low);
            worst = std::max(worst, std::abs(invert_dual(sol, x_low).v - ex_low) / std::max(1.0, std::abs(ex_low)));

            const double x_high = rb.a * (1.0 + 0.1 * i);
            const double z = bisect_first_piece(sol, x_high);
            const double ex_high = *explicit_value(sol, x_high);
            const double lv = eval_J(sol, z).J + x_high * z;
            worst = std::max(worst, std::abs(lv - ex_high) / std::max(1.0, std::abs(ex_high)));
        }
        add("primal.explicit_outer", worst <= 1e-6, "max relative mismatch " + sci(worst));
    }
    {
        const auto grid = v_grid(sol, rb.x_floor, rb.a, opt.grid_points);
        double worst = -1e300;
        bool increasing = true;
        for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
            worst = std::max(worst, grid[i + 1].v - 2.0 * grid[i].v + grid[i - 1].v);
        }
        for (std::size_t i = 1; i < grid.size(); ++i) increasing = increasing && grid[i].v > grid[i - 1].v;
        add("primal.concave_increasing", worst <= 1e-6 && increasing, "max second difference " + sci(worst));
        add("primal.floor_value", invert_dual(sol, rb.x_floor).v == utility(p, p.b) / p.rho, "v(b/r) = U(b)/rho");
    }
    {
        const double mid = 0.5 * (rb.x_floor + rb.a);
        const double th_mid = decide(sol, mid, 1.0).theta;
        const double th_low = decide(sol, rb.x_floor + 1e-6 * (rb.a - rb.x_floor), 1.0).theta;
        add("policy.theta_vanishes_at_floor", th_low <= 1e-2 * th_mid,
            "theta near floor / theta mid = " + sci(th_low / th_mid));
        double prev_c = 0.0;
        bool mono = true;
        double max_jump = 0.0;
        const int n = opt.grid_points;
        for (int i = 0; i <= n; ++i) {
            const double x = rb.x_floor + (rb.a - rb.x_floor) * i / n;
            const double c = decide(sol, x, 1.0).c;
            if (i > 0) {
                mono = mono && c >= prev_c;
                max_jump = std::max(max_jump, c - prev_c);
            }
            prev_c = c;
        }
        add("policy.consumption_monotone", mono && max_jump < 0.05, "max consumption step " + sci(max_jump));
        bool idem = true;
        for (double x : {rb.x_floor, mid, rb.a, 2.0 * rb.a, 10.0 * rb.a}) {
            const auto d1 = decide(sol, x, 1.0);
            const auto d2 = decide(sol, x, d1.cbar_new);
            idem = idem && d2.cbar_new == d1.cbar_new;
        }
        add("policy.ratchet_idempotent", idem, "decide(w, cbar_new).cbar_new == cbar_new");
    }
    if (opt.mc_paths > 0) {
        SimConfig cfg;
        cfg.t_end = opt.mc_t;
        cfg.dt = opt.mc_dt;
        cfg.n_paths = opt.mc_paths;
        cfg.seed = opt.mc_seed;
        cfg.cbar0 = 1.0;
        cfg.w0 = 0.5 * (rb.x_kink + rb.x_one);
        const auto ens = simulate(sol, cfg, OptimalStrategy{});
        const auto drift = estimate_Y_drift(ens, cfg.t_end);
        const double y0 = ens.paths.front().Y0;
        const double allowance = 3.0 * drift.std_error + 2.0 * std::abs(y0) * cfg.dt;
        add("mc.martingale", std::abs(drift.mean) <= allowance,
            "E[Y_t - Y_0] = " + sci(drift.mean) + ", allowance " + sci(allowance));
        const auto diag = aggregate_diagnostics(ens);
        add("mc.feasibility", diag.min_drawdown_slack >= -1e-12 && diag.cbar_decreases == 0,
            "projection fraction " + sci(diag.projection_fraction()));
    }
    return out;
}

}  // namespace drawdown
