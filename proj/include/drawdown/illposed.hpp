/**
 * @file illposed.hpp
 * @brief Infinite-utility construction for R <= R*.
 *
 * Strategy: hold pi_M (w - lambda wbar / r) in the stock and consume lambda wbar,
 * where wbar is the running max of wealth. With alpha_cons = lambda / r and
 * g = r + kappa^2/R, the process (w - alpha_cons wbar) wbar^{alpha_cons/(1-alpha_cons)}
 * is a geometric Brownian motion, which gives
 *   wbar_t = w0 (max_{s<=t} e^{g s} Y_s)^{1 - alpha_cons},
 * Y_t = exp(kappa W_t / R - kappa^2 t / (2 R^2)). Pulling e^{g t} out of the max gives
 * the pathwise upper bound w0 e^{(1 - alpha_cons) g t} Ybar_t^{1 - alpha_cons}.
 * The discounted-utility integrand is compared against
 * (lambda w0)^{1-R} / (1-R) exp(growth_rate * t), which grows for
 * 0 < lambda < r kappa^2 / (2 r R + 2 kappa^2).
 */

#pragma once

#include "drawdown/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace drawdown {

/// r kappa^2 / (2 r R + 2 kappa^2). Throws WellPosed if R > R*.
double lambda_bound(const ModelParams& params);

/// (1 - R)(kappa^2 / 2R - alpha_cons r - alpha_cons kappa^2 / R), alpha_cons = lambda / r.
double growth_rate(const ModelParams& params, double lambda);

/// Running-max wealth on the grid t_k = k dt driven by the increments dW (size n gives n + 1 values).
std::vector<double> closed_form_wbar(const ModelParams& params, double lambda, double w0,
                                     std::span<const double> dW, double dt);

/// w0 e^{(1 - alpha_cons) g t} Ybar_t^{1 - alpha_cons}; never below closed_form_wbar.
std::vector<double> wbar_upper_bound(const ModelParams& params, double lambda, double w0,
                                     std::span<const double> dW, double dt);

/// Same quantity as closed_form_wbar from an Euler-Maruyama discretisation of the wealth equation.
std::vector<double> euler_wbar(const ModelParams& params, double lambda, double w0, std::span<const double> dW,
                               double dt);

struct IllPosedConfig {
    double lambda = 0.0;  ///< <= 0 selects lambda_bound / 2
    double w0 = 1.0;
    std::vector<double> t_grid{5, 10, 15, 20, 25, 30, 35, 40};
    int n_paths = 10000;
    std::uint64_t seed = 0;
    double dt = 1e-2;
};

struct GrowthRow {
    double T = 0.0;
    double G = 0.0;  ///< E[int_0^T e^{-rho t} U(lambda wbar_t) dt]
    double G_stderr = 0.0;
    double integrand = 0.0;  ///< E[e^{-rho T} U(lambda wbar_T)]
    double integrand_stderr = 0.0;
    double lower_bound = 0.0;  ///< (lambda w0)^{1-R}/(1-R) e^{growth_rate T}
};

struct GrowthTable {
    double lambda = 0.0;
    double lambda_bound = 0.0;
    double rate = 0.0;
    std::vector<GrowthRow> rows;
    double fitted_slope = 0.0;  ///< log-linear fit of the integrand means against T
    double slope_stderr = 0.0;  ///< delete-one-group jackknife over 20 path groups
    double ci_low = 0.0;        ///< 95% interval
    double ci_high = 0.0;
};

/// Throws WellPosed for R > R*, ConfigError for lambda outside (0, lambda_bound) or a bad grid.
GrowthTable demonstrate(const ModelParams& params, const IllPosedConfig& config);

/// Mean over paths of |wbar_euler(T) - wbar_closed(T)| / wbar_closed(T) on shared Brownian paths.
double wbar_transform_error(const ModelParams& params, double lambda, double w0, double T, double dt, int n_paths,
                            std::uint64_t seed);

}  // namespace drawdown
