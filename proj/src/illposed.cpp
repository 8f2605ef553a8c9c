#include "drawdown/illposed.hpp"

#include "drawdown/error.hpp"
#include "drawdown/parallel.hpp"

#include <algorithm>
#include <cmath>
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

DerivedConstants ill_posed_constants(const ModelParams& params) {
    const auto d = compute_constants(params);
    if (params.R > d.R_star) {
        throw Error(ErrorCode::WellPosed,
                    "R = " + fmt(params.R) + " exceeds R* = " + fmt(d.R_star) + "; the construction needs R <= R*");
    }
    return d;
}

double alpha_cons(const ModelParams& params, double lambda) {
    const double a = lambda / params.r;
    if (!(a >= 0.0 && a < 1.0)) {
        throw Error(ErrorCode::ConfigError, "lambda / r = " + fmt(a) + " must lie in [0, 1)");
    }
    return a;
}

std::vector<double> brownian_increments(std::uint64_t seed, std::size_t path, std::size_t n, double dt) {
    std::mt19937_64 gen(path_seed(seed, path));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = std::sqrt(dt);
    std::vector<double> dW(n);
    for (auto& v : dW) v = s * normal(gen);
    return dW;
}

// Ordinary least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

double lambda_bound(const ModelParams& params) {
    const auto d = ill_posed_constants(params);
    const double k2 = d.kappa * d.kappa;
    return params.r * k2 / (2.0 * params.r * params.R + 2.0 * k2);
}

double growth_rate(const ModelParams& params, double lambda) {
    const auto d = ill_posed_constants(params);
    const double k2 = d.kappa * d.kappa;
    const double a = lambda / params.r;
    return (1.0 - params.R) * (k2 / (2.0 * params.R) - a * params.r - a * k2 / params.R);
}

namespace {

// Running max of e^{growth t} Y_t, or e^{growth t} times the running max of Y_t when outer.
std::vector<double> wbar_path(const ModelParams& params, double lambda, double w0, std::span<const double> dW,
                              double dt, bool outer) {
    const double a = alpha_cons(params, lambda);
    const double kappa = (params.mu - params.r) / params.sigma;
    const double R = params.R;
    const double growth = params.r + kappa * kappa / R;
    std::vector<double> out(dW.size() + 1);
    double W = 0.0;
    double m = 1.0;
    out[0] = w0;
    for (std::size_t k = 0; k < dW.size(); ++k) {
        W += dW[k];
        const double t = static_cast<double>(k + 1) * dt;
        const double log_y = kappa * W / R - kappa * kappa * t / (2.0 * R * R);
        if (outer) {
            m = std::max(m, std::exp(log_y));
            out[k + 1] = w0 * std::exp((1.0 - a) * growth * t) * std::pow(m, 1.0 - a);
        } else {
            m = std::max(m, std::exp(growth * t + log_y));
            out[k + 1] = w0 * std::pow(m, 1.0 - a);
        }
    }
    return out;
}

}  // namespace

std::vector<double> closed_form_wbar(const ModelParams& params, double lambda, double w0,
                                     std::span<const double> dW, double dt) {
    return wbar_path(params, lambda, w0, dW, dt, false);
}

std::vector<double> wbar_upper_bound(const ModelParams& params, double lambda, double w0,
                                     std::span<const double> dW, double dt) {
    return wbar_path(params, lambda, w0, dW, dt, true);
}

std::vector<double> euler_wbar(const ModelParams& params, double lambda, double w0, std::span<const double> dW,
                               double dt) {
    const double a = alpha_cons(params, lambda);
    const double kappa = (params.mu - params.r) / params.sigma;
    const double drift = (params.r + kappa * kappa / params.R) * dt;
    const double vol = kappa / params.R;
    std::vector<double> out(dW.size() + 1);
    double w = w0;
    double w_max = w0;
    out[0] = w0;
    for (std::size_t k = 0; k < dW.size(); ++k) {
        w += (w - a * w_max) * (drift + vol * dW[k]);
        w_max = std::max(w_max, w);
        out[k + 1] = w_max;
    }
    return out;
}

GrowthTable demonstrate(const ModelParams& params, const IllPosedConfig& cfg) {
    GrowthTable table;
    table.lambda_bound = lambda_bound(params);
    table.lambda = cfg.lambda > 0.0 ? cfg.lambda : 0.5 * table.lambda_bound;
    if (!(table.lambda < table.lambda_bound)) {
        throw Error(ErrorCode::ConfigError,
                    "lambda = " + fmt(table.lambda) + " must lie in (0, " + fmt(table.lambda_bound) + ")");
    }
    table.rate = growth_rate(params, table.lambda);
    if (cfg.t_grid.size() < 2) throw Error(ErrorCode::ConfigError, "t-grid needs at least two times");
    if (!(cfg.dt > 0.0) || cfg.n_paths < 2 || !(cfg.w0 > 0.0)) {
        throw Error(ErrorCode::ConfigError, "need dt > 0, paths >= 2, w0 > 0");
    }
    std::vector<long> grid_steps;
    for (std::size_t j = 0; j < cfg.t_grid.size(); ++j) {
        const double T = cfg.t_grid[j];
        if (!(T > 0.0) || (j > 0 && !(T > cfg.t_grid[j - 1]))) {
            throw Error(ErrorCode::ConfigError, "t-grid must be positive and increasing");
        }
        grid_steps.push_back(std::lround(T / cfg.dt));
    }
    const long n_steps = grid_steps.back();
    const std::size_t n_grid = grid_steps.size();
    const double lam = table.lambda;
    const double R = params.R;
    const double rho = params.rho;
    const double dt = cfg.dt;

    // Per path: G(T_j) then integrand(T_j).
    std::vector<double> per_path(static_cast<std::size_t>(cfg.n_paths) * 2 * n_grid);
    const long count = cfg.n_paths;
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
    for (long i = 0; i < count; ++i) {
        const auto dW = brownian_increments(cfg.seed, static_cast<std::size_t>(i), static_cast<std::size_t>(n_steps), dt);
        const auto wbar = closed_form_wbar(params, lam, cfg.w0, dW, dt);
        double* row = per_path.data() + static_cast<std::size_t>(i) * 2 * n_grid;
        double G = 0.0;
        double f_prev = std::pow(lam * wbar[0], 1.0 - R) / (1.0 - R);
        std::size_t j = 0;
        for (long k = 1; k <= n_steps; ++k) {
            const double t = static_cast<double>(k) * dt;
            const double f = std::exp(-rho * t) * std::pow(lam * wbar[static_cast<std::size_t>(k)], 1.0 - R) / (1.0 - R);
            G += 0.5 * dt * (f_prev + f);
            f_prev = f;
            while (j < n_grid && grid_steps[j] == k) {
                row[j] = G;
                row[n_grid + j] = f;
                ++j;
            }
        }
    }

    const auto n = static_cast<std::size_t>(cfg.n_paths);
    auto column_stats = [&](std::size_t col, std::size_t begin, std::size_t end, double& mean, double& se) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += per_path[i * 2 * n_grid + col];
        const double m = static_cast<double>(end - begin);
        mean = s / m;
        double ss = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double d = per_path[i * 2 * n_grid + col] - mean;
            ss += d * d;
        }
        se = std::sqrt(ss / (m - 1.0) / m);
    };

    std::vector<double> times;
    std::vector<double> log_means;
    for (std::size_t j = 0; j < n_grid; ++j) {
        GrowthRow row;
        row.T = static_cast<double>(grid_steps[j]) * dt;
        column_stats(j, 0, n, row.G, row.G_stderr);
        column_stats(n_grid + j, 0, n, row.integrand, row.integrand_stderr);
        row.lower_bound = std::pow(lam * cfg.w0, 1.0 - R) / (1.0 - R) * std::exp(table.rate * row.T);
        table.rows.push_back(row);
        times.push_back(row.T);
        log_means.push_back(std::log(row.integrand));
    }
    table.fitted_slope = ols_slope(times, log_means);

    // Jackknife over contiguous path groups; the integrand means share paths across T.
    constexpr std::size_t kGroups = 20;
    const std::size_t groups = std::min(kGroups, n);
    std::vector<double> sums(n_grid * groups, 0.0);
    std::vector<std::size_t> sizes(groups, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = i * groups / n;
        ++sizes[g];
        for (std::size_t j = 0; j < n_grid; ++j) sums[g * n_grid + j] += per_path[i * 2 * n_grid + n_grid + j];
    }
    std::vector<double> jack;
    for (std::size_t g = 0; g < groups; ++g) {
        std::vector<double> lm(n_grid);
        for (std::size_t j = 0; j < n_grid; ++j) {
            double s = 0.0;
            for (std::size_t h = 0; h < groups; ++h) {
                if (h != g) s += sums[h * n_grid + j];
            }
            lm[j] = std::log(s / static_cast<double>(n - sizes[g]));
        }
        jack.push_back(ols_slope(times, lm));
    }
    double jm = 0.0;
    for (double s : jack) jm += s;
    jm /= static_cast<double>(groups);
    double jv = 0.0;
    for (double s : jack) jv += (s - jm) * (s - jm);
    const double gd = static_cast<double>(groups);
    table.slope_stderr = std::sqrt((gd - 1.0) / gd * jv);
    // Student t quantile, 19 degrees of freedom.
    constexpr double kT975 = 2.093;
    table.ci_low = table.fitted_slope - kT975 * table.slope_stderr;
    table.ci_high = table.fitted_slope + kT975 * table.slope_stderr;
    return table;
}

double wbar_transform_error(const ModelParams& params, double lambda, double w0, double T, double dt, int n_paths,
                            std::uint64_t seed) {
    const auto n_steps = static_cast<std::size_t>(std::lround(T / dt));
    std::vector<double> errs(static_cast<std::size_t>(n_paths));
    const long count = n_paths;
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
    for (long i = 0; i < count; ++i) {
        const auto dW = brownian_increments(seed, static_cast<std::size_t>(i), n_steps, dt);
        const double exact = closed_form_wbar(params, lambda, w0, dW, dt).back();
        const double approx = euler_wbar(params, lambda, w0, dW, dt).back();
        errs[static_cast<std::size_t>(i)] = std::abs(approx - exact) / exact;
    }
    double s = 0.0;
    for (double e : errs) s += e;
    return s / static_cast<double>(n_paths);
}

}  // namespace drawdown
