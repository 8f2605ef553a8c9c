#include "drawdown/cli.hpp"

#include "drawdown/error.hpp"
#include "drawdown/illposed.hpp"
#include "drawdown/io.hpp"
#include "drawdown/policy.hpp"
#include "drawdown/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <ostream>
#include <sstream>

#ifndef DRAWDOWN_VERSION
#define DRAWDOWN_VERSION "dev"
#endif

namespace drawdown::cli {

namespace {

using nlohmann::json;

// Output of one subcommand run: files written plus anything meant for stdout.
struct Outputs {
    std::vector<std::string> files;
    std::string stdout_text;
};

// Writes to `path` when given, otherwise collects for stdout.
void emit(Outputs& o, const std::string& path, const std::string& text) {
    if (path.empty()) {
        o.stdout_text += text;
    } else {
        io::write_text(path, text);
        o.files.push_back(path);
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    ss.imbue(std::locale::classic());
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (...) {
            used = 0;
        }
        if (used != item.size()) throw Error(ErrorCode::ConfigError, "cannot parse number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

Strategy parse_strategy(const std::string& s) {
    if (s == "optimal") return OptimalStrategy{};
    if (s.rfind("prop:", 0) == 0) {
        auto body = s.substr(5);
        std::replace(body.begin(), body.end(), ':', ',');
        const auto parts = parse_list(body);
        if (parts.size() == 2) return ConstantProportion{parts[0], parts[1]};
    }
    throw Error(ErrorCode::ConfigError, "strategy must be 'optimal' or 'prop:PI:S', got '" + s + "'");
}

json estimate_json(double t, const Estimate& e) { return {{"t", t}, {"mean", e.mean}, {"stderr", e.std_error}}; }

// ---- subcommand bodies: resolved config in, files out -------------------------------------

Outputs exec_solve(const json& cfg, const std::string& out_path) {
    const auto params = io::params_from_json(cfg.at("params"));
    const auto sol = solve(params);
    const auto rb = region_boundaries(sol);
    Outputs o;
    emit(o, out_path, io::solution_to_json(sol, rb).dump(2) + "\n");
    return o;
}

Outputs exec_table(const json& cfg, const std::string& out_path) {
    const auto params = io::params_from_json(cfg.at("params"));
    const auto sol = solve(params);
    const auto rb = region_boundaries(sol);
    const bool policy = cfg.at("policy").get<bool>();
    const int n = cfg.at("n").get<int>();
    const double x_lo = cfg.at("x_lo").is_null() ? rb.x_floor : cfg.at("x_lo").get<double>();
    const double x_hi = cfg.at("x_hi").is_null() ? (policy ? rb.a : 2.0 * rb.a) : cfg.at("x_hi").get<double>();
    const auto grid = v_grid(sol, x_lo, x_hi, n);
    Outputs o;
    if (!policy) {
        emit(o, out_path, io::value_table_csv(grid));
        return o;
    }
    std::vector<io::PolicyRow> rows;
    rows.reserve(grid.size());
    for (const auto& pt : grid) {
        const auto d = decide(sol, pt.x, 1.0, std::isfinite(pt.vp) ? std::optional<double>(pt.vp) : std::nullopt);
        // Above a the ratchet rescales cbar; report controls per unit of the original cbar.
        rows.push_back({pt.x, d.theta, d.c, pt.region});
    }
    emit(o, out_path, io::policy_table_csv(rows));
    return o;
}

Outputs exec_simulate(const json& cfg, const std::string& out_path) {
    if (out_path.empty()) throw Error(ErrorCode::ConfigError, "simulate requires --out FILE");
    const auto params = io::params_from_json(cfg.at("params"));
    const auto sol = solve(params);
    const auto rb = region_boundaries(sol);
    SimConfig sc;
    sc.t_end = cfg.at("t_end").get<double>();
    sc.dt = cfg.at("dt").get<double>();
    sc.n_paths = cfg.at("paths").get<int>();
    sc.seed = cfg.at("seed").get<std::uint64_t>();
    sc.cbar0 = cfg.at("cbar0").get<double>();
    sc.w0 = cfg.at("w0").is_null() ? 0.5 * (rb.x_kink + rb.x_one) * sc.cbar0 : cfg.at("w0").get<double>();
    sc.record_paths = cfg.at("record_paths").get<int>();
    sc.sample_times = cfg.at("sample_times").get<std::vector<double>>();
    const auto strategy = parse_strategy(cfg.at("strategy").get<std::string>());

    const auto ens = simulate(sol, sc, strategy);
    Outputs o;
    std::vector<std::string> path_files;
    const std::filesystem::path base(out_path);
    for (std::size_t i = 0; i < ens.records.size(); ++i) {
        auto p = base;
        p.replace_extension();
        const std::string file = p.string() + ".path" + std::to_string(i) + ".csv";
        io::write_text(file, io::path_csv(ens.records[i]));
        o.files.push_back(file);
        path_files.push_back(std::filesystem::path(file).filename().string());
    }

    json summary;
    summary["strategy"] = ens.strategy;
    summary["params"] = io::params_to_json(params);
    summary["w0"] = sc.w0;
    summary["cbar0"] = sc.cbar0;
    summary["dt"] = sc.dt;
    summary["paths"] = sc.n_paths;
    summary["steps_per_path"] = ens.steps_per_path;
    summary["Y0"] = ens.paths.front().Y0;
    summary["boundaries"] = {{"x_floor", rb.x_floor}, {"x_kink", rb.x_kink}, {"x_one", rb.x_one}, {"a", rb.a}};
    json drift = json::array();
    json decay = json::array();
    for (double t : ens.sample_times) {
        drift.push_back(estimate_json(t, estimate_Y_drift(ens, t)));
    }
    for (const auto& dp : residual_decay(ens, ens.sample_times)) decay.push_back(estimate_json(dp.t, dp.value));
    summary["Y_drift"] = drift;
    summary["residual_decay"] = decay;
    const auto bc = estimate_budget(ens);
    summary["budget"] = {{"horizon", bc.horizon},
                         {"w0", bc.w0},
                         {"mean", bc.consumption_value.mean},
                         {"stderr", bc.consumption_value.std_error},
                         {"within_budget", bc.within_budget()},
                         {"Z_nonincreasing", bc.Z_nonincreasing}};
    const auto d = aggregate_diagnostics(ens);
    summary["diagnostics"] = {{"steps", d.steps},
                              {"floor_projections", d.floor_projections},
                              {"projection_fraction", d.projection_fraction()},
                              {"floor_breaches", d.floor_breaches},
                              {"ratchets", d.ratchets},
                              {"band_violations", d.band_violations},
                              {"cbar_decreases", d.cbar_decreases},
                              {"bankrupt_paths", d.bankrupt_paths},
                              {"min_drawdown_slack", d.min_drawdown_slack}};
    summary["path_files"] = path_files;
    emit(o, out_path, summary.dump(2) + "\n");
    return o;
}

Outputs exec_verify(const json& cfg, const std::string& out_path, bool& all_passed) {
    const auto params = io::params_from_json(cfg.at("params"));
    VerifyOptions opt;
    opt.mc_paths = cfg.at("mc_paths").get<int>();
    opt.mc_dt = cfg.at("mc_dt").get<double>();
    opt.mc_seed = cfg.at("seed").get<std::uint64_t>();
    const auto results = run_invariant_suite(params, opt);
    std::string report;
    all_passed = true;
    for (const auto& r : results) {
        all_passed = all_passed && r.passed;
        report += std::string(r.passed ? "PASS " : "FAIL ") + r.name + "  " + r.detail + "\n";
    }
    report += all_passed ? "all invariants hold\n" : "invariant failures detected\n";
    Outputs o;
    emit(o, out_path, report);
    return o;
}

Outputs exec_illposed(const json& cfg, const std::string& out_path) {
    const auto params = io::params_from_json(cfg.at("params"));
    IllPosedConfig ic;
    ic.lambda = cfg.at("lambda").is_null() ? 0.0 : cfg.at("lambda").get<double>();
    ic.w0 = cfg.at("w0").get<double>();
    ic.t_grid = cfg.at("t_grid").get<std::vector<double>>();
    ic.n_paths = cfg.at("paths").get<int>();
    ic.seed = cfg.at("seed").get<std::uint64_t>();
    ic.dt = cfg.at("dt").get<double>();
    const auto table = demonstrate(params, ic);
    json j;
    j["params"] = io::params_to_json(params);
    j["R_star"] = compute_constants(params).R_star;
    j["lambda_bound"] = table.lambda_bound;
    j["lambda"] = table.lambda;
    j["rate"] = table.rate;
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"T", r.T},
                        {"G", r.G},
                        {"stderr", r.G_stderr},
                        {"integrand", r.integrand},
                        {"integrand_stderr", r.integrand_stderr},
                        {"lower_bound", r.lower_bound}});
    }
    j["table"] = rows;
    j["fitted_slope"] = table.fitted_slope;
    j["slope_stderr"] = table.slope_stderr;
    j["ci"] = {table.ci_low, table.ci_high};
    Outputs o;
    emit(o, out_path, j.dump(2) + "\n");
    return o;
}

// Runs a resolved subcommand; returns the exit code.
int execute(const std::string& sub, const json& cfg, const std::string& out_path, Outputs& o) {
    if (sub == "solve") {
        o = exec_solve(cfg, out_path);
    } else if (sub == "table") {
        o = exec_table(cfg, out_path);
    } else if (sub == "simulate") {
        o = exec_simulate(cfg, out_path);
    } else if (sub == "verify") {
        bool ok = false;
        o = exec_verify(cfg, out_path, ok);
        return ok ? 0 : 2;
    } else if (sub == "illposed") {
        o = exec_illposed(cfg, out_path);
    } else {
        throw Error(ErrorCode::ConfigError, "unknown subcommand '" + sub + "'");
    }
    return 0;
}

void write_manifest(const std::string& path, const std::string& sub, const json& cfg, const Outputs& o,
                    double seconds) {
    json m;
    m["subcommand"] = sub;
    m["config"] = cfg;
    m["seed"] = cfg.contains("seed") ? cfg.at("seed") : json(nullptr);
    m["version"] = DRAWDOWN_VERSION;
    m["outputs"] = o.files;
    m["wall_clock_seconds"] = seconds;
    io::write_text(path, m.dump(2) + "\n");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Merton consumption-investment with a drawdown constraint on consumption"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DRAWDOWN_VERSION);

    std::string config_path, out_path, manifest_path;
    auto common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "JSON file with keys r, mu, sigma, rho, R, b")->required();
        s->add_option("--out", out_path, "output file (stdout when omitted)");
        s->add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest.json)");
    };

    auto* solve_cmd = app.add_subcommand("solve", "dual coefficients, z_a, knots and region boundaries as JSON");
    common(solve_cmd);

    auto* table_cmd = app.add_subcommand("table", "CSV of v(x), or of the optimal policy with --policy");
    common(table_cmd);
    bool policy = false;
    int n_points = 200;
    std::optional<double> x_lo, x_hi;
    table_cmd->add_flag("--policy", policy, "emit x,theta_over_cbar,c_over_cbar,region");
    table_cmd->add_option("--n", n_points, "grid size")->check(CLI::Range(2, 10000000));
    table_cmd->add_option("--x-lo", x_lo, "grid start (default b/r)");
    table_cmd->add_option("--x-hi", x_hi, "grid end (default 2a, or a with --policy)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo paths plus an ensemble summary JSON");
    common(sim_cmd);
    double t_end = 1.0, dt = 1e-3, cbar0 = 2.0;
    int paths = 1, record_paths = 1;
    std::uint64_t seed = 0;
    std::optional<double> w0;
    std::string strategy = "optimal", sample_times;
    sim_cmd->add_option("--t-end", t_end, "horizon");
    sim_cmd->add_option("--dt", dt, "time step");
    sim_cmd->add_option("--paths", paths, "number of paths");
    sim_cmd->add_option("--seed", seed, "ensemble seed");
    sim_cmd->add_option("--w0", w0, "initial wealth (default mid-interior times cbar0)");
    sim_cmd->add_option("--cbar0", cbar0, "initial running max of consumption");
    sim_cmd->add_option("--strategy", strategy, "optimal | prop:PI:S");
    sim_cmd->add_option("--record-paths", record_paths, "paths written as CSV");
    sim_cmd->add_option("--sample-times", sample_times, "comma-separated summary times (t_end always included)");

    auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
    common(verify_cmd);
    int mc_paths = 2000;
    double mc_dt = 2e-3;
    std::uint64_t verify_seed = 1;
    verify_cmd->add_option("--mc-paths", mc_paths, "Monte-Carlo paths for the martingale check (0 skips)");
    verify_cmd->add_option("--mc-dt", mc_dt, "Monte-Carlo time step");
    verify_cmd->add_option("--seed", verify_seed, "Monte-Carlo seed");

    auto* ill_cmd = app.add_subcommand("illposed", "growth of expected utility for R <= R*");
    common(ill_cmd);
    std::optional<double> ill_R, ill_lambda;
    std::string t_grid = "5,10,15,20,25,30,35,40";
    int ill_paths = 10000;
    std::uint64_t ill_seed = 0;
    double ill_dt = 1e-2, ill_w0 = 1.0;
    ill_cmd->add_option("--R", ill_R, "risk aversion override");
    ill_cmd->add_option("--lambda", ill_lambda, "consumption coefficient (default lambda_bound / 2)");
    ill_cmd->add_option("--t-grid", t_grid, "comma-separated horizons");
    ill_cmd->add_option("--paths", ill_paths, "number of paths");
    ill_cmd->add_option("--seed", ill_seed, "ensemble seed");
    ill_cmd->add_option("--dt", ill_dt, "time step");
    ill_cmd->add_option("--w0", ill_w0, "initial wealth");

    auto* replay_cmd = app.add_subcommand("replay", "re-run a subcommand from its manifest");
    std::string replay_manifest, replay_dir;
    replay_cmd->add_option("--manifest", replay_manifest, "manifest written by an earlier run")->required();
    replay_cmd->add_option("--out-dir", replay_dir, "directory for the regenerated outputs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << DRAWDOWN_VERSION << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const auto started = std::chrono::steady_clock::now();
        std::string sub;
        json cfg;
        std::string target = out_path;
        if (replay_cmd->parsed()) {
            const auto m = io::read_json_file(replay_manifest);
            sub = m.at("subcommand").get<std::string>();
            cfg = m.at("config");
            const auto original = m.at("outputs").get<std::vector<std::string>>();
            // The primary output is listed last; side files are derived from it.
            target = original.empty() ? std::string() : original.back();
            if (!replay_dir.empty() && !target.empty()) {
                target = (std::filesystem::path(replay_dir) / std::filesystem::path(target).filename()).string();
            }
        } else {
            sub = app.get_subcommands().front()->get_name();
            cfg["params"] = io::params_to_json(io::load_params(config_path));
            if (sub == "table") {
                cfg["policy"] = policy;
                cfg["n"] = n_points;
                cfg["x_lo"] = x_lo ? json(*x_lo) : json(nullptr);
                cfg["x_hi"] = x_hi ? json(*x_hi) : json(nullptr);
            } else if (sub == "simulate") {
                cfg["t_end"] = t_end;
                cfg["dt"] = dt;
                cfg["paths"] = paths;
                cfg["seed"] = seed;
                cfg["w0"] = w0 ? json(*w0) : json(nullptr);
                cfg["cbar0"] = cbar0;
                cfg["strategy"] = strategy;
                cfg["record_paths"] = record_paths;
                cfg["sample_times"] = parse_list(sample_times);
            } else if (sub == "verify") {
                cfg["mc_paths"] = mc_paths;
                cfg["mc_dt"] = mc_dt;
                cfg["seed"] = verify_seed;
            } else if (sub == "illposed") {
                if (ill_R) cfg["params"]["R"] = *ill_R;
                cfg["lambda"] = ill_lambda ? json(*ill_lambda) : json(nullptr);
                cfg["t_grid"] = parse_list(t_grid);
                cfg["paths"] = ill_paths;
                cfg["seed"] = ill_seed;
                cfg["dt"] = ill_dt;
                cfg["w0"] = ill_w0;
            }
        }

        Outputs o;
        const int code = execute(sub, cfg, target, o);
        out << o.stdout_text;
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (!replay_cmd->parsed()) {
            const std::string mpath = !manifest_path.empty() ? manifest_path
                                      : !out_path.empty()    ? out_path + ".manifest.json"
                                                             : std::string();
            if (!mpath.empty()) write_manifest(mpath, sub, cfg, o, seconds);
        }
        return code;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_numerical_failure(e.code()) ? 2 : 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed configuration: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace drawdown::cli
