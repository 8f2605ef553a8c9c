#include "drawdown/sim.hpp"

#include "drawdown/error.hpp"
#include "drawdown/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>

namespace drawdown {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string strategy_name(const Strategy& strategy) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, OptimalStrategy>) {
                return "optimal";
            } else if constexpr (std::is_same_v<T, ConstantProportion>) {
                return "prop:" + fmt(s.pi) + ":" + fmt(s.s);
            } else {
                return s.name.empty() ? std::string("feedback") : s.name;
            }
        },
        strategy);
}

double scaled_to_full(const DualSolution& sol, double v, double cbar) {
    if (sol.branch == UtilityBranch::Log) return v + std::log(cbar) / sol.params.rho;
    return std::pow(cbar, 1.0 - sol.params.R) * v;
}

struct StepState {
    double theta = 0.0;
    double c = 0.0;
    double cbar = 0.0;
    double x = 0.0;
    double V = 0.0;
    double z = 0.0;
    Region region = Region::Floor;
};

// Controls and value at (t, w, cbar). For the optimal strategy cbar may ratchet.
StepState evaluate(const DualSolution& sol, const Strategy& strategy, double t, double w, double cbar,
                   double z_hint) {
    StepState st;
    const double floor_x = sol.params.b / sol.params.r;
    std::optional<double> hint;
    if (z_hint > 0.0 && std::isfinite(z_hint)) hint = z_hint;
    if (std::holds_alternative<OptimalStrategy>(strategy)) {
        const auto d = decide(sol, w, cbar, hint);
        st.theta = d.theta;
        st.c = d.c;
        st.cbar = d.cbar_new;
        st.x = d.point.x;
        st.region = d.region;
        st.z = d.point.vp;
        st.V = scaled_to_full(sol, d.point.v, st.cbar);
        return st;
    }
    Control ctl;
    if (const auto* cp = std::get_if<ConstantProportion>(&strategy)) {
        ctl = {cp->pi * w, cp->s * cbar};
    } else {
        ctl = std::get<FeedbackStrategy>(strategy).control(t, w, cbar);
    }
    st.theta = ctl.theta;
    st.c = ctl.c;
    st.cbar = std::max(cbar, ctl.c);
    st.x = w / st.cbar;
    // Below the floor no feasible continuation exists; the floor value is an upper bound.
    const auto pt = invert_dual(sol, std::max(st.x, floor_x), hint);
    st.region = pt.region;
    st.z = pt.vp;
    st.V = scaled_to_full(sol, pt.v, st.cbar);
    return st;
}

struct PathOutput {
    PathSummary summary;
    PathRecord record;
};

PathOutput run_path(const DualSolution& sol, const SimConfig& cfg, const Strategy& strategy, long n_steps,
                    const std::vector<long>& sample_steps, std::size_t path_index, bool keep_record) {
    const auto& p = sol.params;
    const bool optimal = std::holds_alternative<OptimalStrategy>(strategy);
    const double kappa = sol.derived.kappa;
    const double floor_x = p.b / p.r;
    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    const double band = 10.0 * sqrt_dt * p.sigma * sol.a;
    const double stock_drift = (p.mu - 0.5 * p.sigma * p.sigma) * dt;

    std::mt19937_64 gen(path_seed(cfg.seed, path_index));
    std::normal_distribution<double> normal(0.0, 1.0);

    PathOutput out;
    auto& sum = out.summary;
    auto& diag = sum.diag;
    const std::size_t n_samples = sample_steps.size();
    sum.Y.assign(n_samples, 0.0);
    sum.discounted_value.assign(n_samples, 0.0);
    sum.Z.assign(n_samples, 0.0);
    sum.zeta_c.assign(n_samples, 0.0);

    double t = 0.0;
    double S = cfg.S0;
    double w = cfg.w0;
    double W = 0.0;
    double zeta = 1.0;
    double utility_integral = 0.0;
    double zeta_c_integral = 0.0;

    StepState st = evaluate(sol, strategy, t, w, cfg.cbar0, 0.0);
    if (st.cbar > cfg.cbar0) ++diag.ratchets;
    double cbar = st.cbar;
    double Y = st.V;
    sum.Y0 = Y;
    diag.min_drawdown_slack = (st.c - p.b * cbar) / cfg.cbar0;

    auto& rec = out.record;
    auto push_record = [&] {
        rec.t.push_back(t);
        rec.S.push_back(S);
        rec.w.push_back(w);
        rec.cbar.push_back(cbar);
        rec.x.push_back(st.x);
        rec.theta.push_back(st.theta);
        rec.c.push_back(st.c);
        rec.region.push_back(st.region);
        rec.Y.push_back(Y);
    };
    std::size_t next_sample = 0;
    auto store_samples = [&](long step) {
        while (next_sample < n_samples && sample_steps[next_sample] == step) {
            sum.Y[next_sample] = Y;
            sum.discounted_value[next_sample] = std::exp(-p.rho * t) * st.V;
            sum.Z[next_sample] = zeta * w + zeta_c_integral;
            sum.zeta_c[next_sample] = zeta_c_integral;
            ++next_sample;
        }
    };
    if (keep_record) {
        rec.t.reserve(static_cast<std::size_t>(n_steps) + 1);
        push_record();
    }
    store_samples(0);

    for (long k = 0; k < n_steps; ++k) {
        const double dW = sqrt_dt * normal(gen);
        const double t_next = static_cast<double>(k + 1) * dt;
        S *= std::exp(stock_drift + p.sigma * dW);
        w += (p.r * w + st.theta * (p.mu - p.r) - st.c) * dt + st.theta * p.sigma * dW;
        W += dW;
        const double zeta_next = std::exp(-(p.r + 0.5 * kappa * kappa) * t_next - kappa * W);
        ++diag.steps;

        if (!optimal && w < 0.0) {
            diag.bankrupt = true;
            diag.bankrupt_time = t_next;
            break;
        }
        if (w / cbar < floor_x - band || w / cbar > sol.a + band) ++diag.band_violations;
        if (optimal) {
            if (w / cbar > sol.a) {
                cbar = w / sol.a;
                ++diag.ratchets;
            }
            if (w < floor_x * cbar) {
                w = floor_x * cbar;
                ++diag.floor_projections;
            }
        } else if (w < floor_x * cbar) {
            ++diag.floor_breaches;
        }

        const double u_prev = std::exp(-p.rho * t) * utility(p, st.c);
        const double zc_prev = zeta * st.c;
        const double cbar_before = cbar;
        st = evaluate(sol, strategy, t_next, w, cbar, st.z);
        if (st.cbar > cbar_before && !optimal) ++diag.ratchets;
        if (st.cbar < cbar_before) ++diag.cbar_decreases;
        cbar = st.cbar;
        t = t_next;
        zeta = zeta_next;
        utility_integral += 0.5 * dt * (u_prev + std::exp(-p.rho * t) * utility(p, st.c));
        zeta_c_integral += 0.5 * dt * (zc_prev + zeta * st.c);
        Y = utility_integral + std::exp(-p.rho * t) * st.V;
        diag.min_drawdown_slack = std::min(diag.min_drawdown_slack, (st.c - p.b * cbar) / cfg.cbar0);

        if (keep_record) push_record();
        store_samples(k + 1);
    }
    // A bankrupt path keeps its last valid values for the remaining samples.
    while (next_sample < n_samples) {
        sum.Y[next_sample] = Y;
        sum.discounted_value[next_sample] = std::exp(-p.rho * t) * st.V;
        sum.Z[next_sample] = zeta * w + zeta_c_integral;
        sum.zeta_c[next_sample] = zeta_c_integral;
        ++next_sample;
    }
    return out;
}

struct Plan {
    long n_steps = 0;
    std::vector<long> sample_steps;
    std::vector<double> sample_times;
};

Plan make_plan(const SimConfig& cfg) {
    Plan plan;
    plan.n_steps = std::max(1L, std::lround(cfg.t_end / cfg.dt));
    std::vector<long> steps;
    for (double ts : cfg.sample_times) steps.push_back(std::clamp(std::lround(ts / cfg.dt), 0L, plan.n_steps));
    steps.push_back(plan.n_steps);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    plan.sample_steps = steps;
    for (long s : steps) plan.sample_times.push_back(static_cast<double>(s) * cfg.dt);
    return plan;
}

Ensemble run(const DualSolution& sol, const SimConfig& cfg, const Strategy& strategy, bool parallel) {
    validate_config(sol, cfg, strategy);
    const Plan plan = make_plan(cfg);
    Ensemble ens;
    ens.config = cfg;
    ens.strategy = strategy_name(strategy);
    ens.steps_per_path = plan.n_steps;
    ens.sample_times = plan.sample_times;
    const auto n = static_cast<std::size_t>(cfg.n_paths);
    const auto n_records = static_cast<std::size_t>(std::clamp(cfg.record_paths, 0, cfg.n_paths));
    ens.paths.resize(n);
    ens.records.resize(n_records);
    std::vector<std::exception_ptr> errors(n);

    auto body = [&](std::size_t i) {
        try {
            auto out = run_path(sol, cfg, strategy, plan.n_steps, plan.sample_steps, i, i < n_records);
            ens.paths[i] = std::move(out.summary);
            if (i < n_records) ens.records[i] = std::move(out.record);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    if (parallel) {
        const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
        for (long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return ens;
}

Estimate mean_and_stderr(const std::vector<double>& xs) {
    Estimate e;
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

std::size_t sample_index(const Ensemble& ens, double t) {
    for (std::size_t j = 0; j < ens.sample_times.size(); ++j) {
        if (std::abs(ens.sample_times[j] - t) <= 0.5 * ens.config.dt) return j;
    }
    throw Error(ErrorCode::ConfigError, "t=" + fmt(t) + " is not a sample time of the ensemble");
}

}  // namespace

FeedbackStrategy table_strategy(std::vector<StrategyTableRow> rows) {
    if (rows.empty()) throw Error(ErrorCode::ConfigError, "strategy table is empty");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].x > rows[i - 1].x)) throw Error(ErrorCode::ConfigError, "strategy table x must increase");
    }
    FeedbackStrategy fs;
    fs.name = "table";
    fs.control = [rows = std::move(rows)](double, double w, double cbar) {
        const double x = w / cbar;
        auto it = std::lower_bound(rows.begin(), rows.end(), x,
                                   [](const StrategyTableRow& row, double v) { return row.x < v; });
        double th = 0.0;
        double cc = 0.0;
        if (it == rows.begin()) {
            th = rows.front().theta_over_cbar;
            cc = rows.front().c_over_cbar;
        } else if (it == rows.end()) {
            th = rows.back().theta_over_cbar;
            cc = rows.back().c_over_cbar;
        } else {
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double f = (x - lo.x) / (hi.x - lo.x);
            th = lo.theta_over_cbar + f * (hi.theta_over_cbar - lo.theta_over_cbar);
            cc = lo.c_over_cbar + f * (hi.c_over_cbar - lo.c_over_cbar);
        }
        return Control{th * cbar, cc * cbar};
    };
    return fs;
}

void validate_config(const DualSolution& sol, const SimConfig& cfg, const Strategy& strategy) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
    if (!(cfg.dt > 0.0)) fail("dt must be > 0");
    if (!(cfg.t_end >= cfg.dt)) fail("t_end must be >= dt");
    if (cfg.n_paths < 1) fail("n_paths must be >= 1");
    if (!(cfg.cbar0 > 0.0)) fail("cbar0 must be > 0");
    if (!(cfg.S0 > 0.0)) fail("S0 must be > 0");
    const double floor_x = sol.params.b / sol.params.r;
    if (!(cfg.w0 / cfg.cbar0 >= floor_x * (1.0 - kFloorSnap))) {
        fail("w0/cbar0 = " + fmt(cfg.w0 / cfg.cbar0) + " must be >= b/r = " + fmt(floor_x));
    }
    for (double ts : cfg.sample_times) {
        if (!(ts >= 0.0 && ts <= cfg.t_end + 0.5 * cfg.dt)) fail("sample time " + fmt(ts) + " outside [0, t_end]");
    }
    if (const auto* cp = std::get_if<ConstantProportion>(&strategy)) {
        if (!std::isfinite(cp->pi)) fail("constant-proportion pi must be finite");
        if (!(cp->s >= sol.params.b && cp->s <= 1.0)) fail("constant-proportion s must lie in [b, 1]");
    }
    if (const auto* fs = std::get_if<FeedbackStrategy>(&strategy)) {
        if (!fs->control) fail("feedback strategy has no control function");
    }
}

Ensemble simulate_serial(const DualSolution& sol, const SimConfig& config, const Strategy& strategy) {
    return run(sol, config, strategy, false);
}

Ensemble simulate(const DualSolution& sol, const SimConfig& config, const Strategy& strategy) {
    return run(sol, config, strategy, true);
}

EnsembleDiagnostics aggregate_diagnostics(const Ensemble& ens) {
    EnsembleDiagnostics agg;
    agg.min_drawdown_slack = std::numeric_limits<double>::infinity();
    for (const auto& path : ens.paths) {
        const auto& d = path.diag;
        agg.steps += d.steps;
        agg.floor_projections += d.floor_projections;
        agg.floor_breaches += d.floor_breaches;
        agg.ratchets += d.ratchets;
        agg.band_violations += d.band_violations;
        agg.cbar_decreases += d.cbar_decreases;
        agg.bankrupt_paths += d.bankrupt ? 1 : 0;
        agg.min_drawdown_slack = std::min(agg.min_drawdown_slack, d.min_drawdown_slack);
    }
    return agg;
}

Estimate estimate_Y_drift(const Ensemble& ens, double t) {
    if (t == 0.0) return {};
    const auto j = sample_index(ens, t);
    std::vector<double> diffs;
    diffs.reserve(ens.paths.size());
    for (const auto& p : ens.paths) diffs.push_back(p.Y[j] - p.Y0);
    return mean_and_stderr(diffs);
}

BudgetCheck estimate_budget(const Ensemble& ens) {
    BudgetCheck bc;
    bc.w0 = ens.config.w0;
    bc.horizon = ens.sample_times.back();
    const std::size_t last = ens.sample_times.size() - 1;
    std::vector<double> buf;
    buf.reserve(ens.paths.size());
    for (const auto& p : ens.paths) buf.push_back(p.zeta_c[last]);
    bc.consumption_value = mean_and_stderr(buf);

    bc.times.push_back(0.0);
    bc.Z_mean.push_back({ens.config.w0, 0.0});
    for (std::size_t j = 0; j < ens.sample_times.size(); ++j) {
        if (ens.sample_times[j] == 0.0) continue;
        buf.clear();
        for (const auto& p : ens.paths) buf.push_back(p.Z[j]);
        bc.times.push_back(ens.sample_times[j]);
        bc.Z_mean.push_back(mean_and_stderr(buf));
    }
    // Paired increments between successive sample times.
    for (std::size_t j = 1; j < bc.times.size(); ++j) {
        buf.clear();
        const std::size_t cur = sample_index(ens, bc.times[j]);
        const std::size_t prev = j == 1 ? 0 : sample_index(ens, bc.times[j - 1]);
        for (const auto& p : ens.paths) buf.push_back(p.Z[cur] - (j == 1 ? ens.config.w0 : p.Z[prev]));
        const auto inc = mean_and_stderr(buf);
        if (inc.mean > 3.0 * inc.std_error) bc.Z_nonincreasing = false;
    }
    return bc;
}

std::vector<DecayPoint> residual_decay(const Ensemble& ens, const std::vector<double>& t_grid) {
    std::vector<DecayPoint> out;
    std::vector<double> buf;
    for (double t : t_grid) {
        buf.clear();
        if (t == 0.0) {
            for (const auto& p : ens.paths) buf.push_back(p.Y0);
        } else {
            const auto j = sample_index(ens, t);
            for (const auto& p : ens.paths) buf.push_back(p.discounted_value[j]);
        }
        out.push_back({t, mean_and_stderr(buf)});
    }
    return out;
}

}  // namespace drawdown
