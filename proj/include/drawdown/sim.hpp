/**
 * @file sim.hpp
 * @brief Monte-Carlo engine for wealth, stock and running-max consumption.
 *
 * Each path draws its own normal increments from a generator seeded by
 * path_seed(seed, i), so paths are independent of evaluation order. Two kernels
 * share the per-path code: simulate_serial() is the reference loop and
 * simulate() distributes paths over OpenMP threads. Their ensembles are
 * bit-identical.
 *
 * Stepping, per path and step of length dt:
 *   S  <- S exp((mu - sigma^2/2) dt + sigma dW)
 *   w  <- w + (r w + theta (mu - r) - c) dt + theta sigma dW
 * then, for the optimal strategy only, ratchet cbar <- max(cbar, w / a) and
 * project w <- max(w, (b/r) cbar). The discounted-utility integral in
 * Y_t = int_0^t e^{-rho s} U(c_s) ds + e^{-rho t} V(w_t, cbar_t)
 * uses the trapezoidal rule, as does int zeta c with the state-price density
 * zeta_t = exp(-r t - kappa^2 t / 2 - kappa W_t).
 */

#pragma once

#include "drawdown/policy.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace drawdown {

struct SimConfig {
    double t_end = 1.0;
    double dt = 1e-3;
    int n_paths = 1;
    std::uint64_t seed = 0;
    double w0 = 0.0;
    double cbar0 = 0.0;
    double S0 = 1.0;
    /// Times at which per-path summaries are kept; snapped to the step grid. t_end is always added.
    std::vector<double> sample_times;
    /// Number of leading paths whose full time series is retained.
    int record_paths = 0;
};

struct Control {
    double theta = 0.0;
    double c = 0.0;
};

struct OptimalStrategy {};

/// theta = pi * w, c = s * cbar with s in [b, 1].
struct ConstantProportion {
    double pi = 0.0;
    double s = 1.0;
};

/// Arbitrary feedback control (t, w, cbar) -> (theta, c). Must be safe to call concurrently.
struct FeedbackStrategy {
    std::string name;
    std::function<Control(double t, double w, double cbar)> control;
};

using Strategy = std::variant<OptimalStrategy, ConstantProportion, FeedbackStrategy>;

/// Row of a user strategy table keyed by x = w / cbar.
struct StrategyTableRow {
    double x = 0.0;
    double theta_over_cbar = 0.0;
    double c_over_cbar = 0.0;
};

/// Piecewise-linear table strategy, flat beyond the end rows. Rows must be sorted by x.
FeedbackStrategy table_strategy(std::vector<StrategyTableRow> rows);

struct PathRecord {
    std::vector<double> t, S, w, cbar, x, theta, c, Y;
    std::vector<Region> region;
};

struct PathDiagnostics {
    long steps = 0;
    long floor_projections = 0;  ///< optimal strategy: steps where w was raised to (b/r) cbar
    long floor_breaches = 0;     ///< user strategies: steps ending below (b/r) cbar
    long ratchets = 0;
    long band_violations = 0;    ///< pre-projection x outside [b/r - eps, a + eps]
    long cbar_decreases = 0;
    double min_drawdown_slack = 0.0;  ///< min over steps of (c - b cbar) / cbar0
    bool bankrupt = false;
    double bankrupt_time = 0.0;
};

struct PathSummary {
    double Y0 = 0.0;
    // Indexed like Ensemble::sample_times.
    std::vector<double> Y;
    std::vector<double> discounted_value;  ///< e^{-rho t} V(w_t, cbar_t)
    std::vector<double> Z;                 ///< zeta_t w_t + int_0^t zeta c
    std::vector<double> zeta_c;            ///< int_0^t zeta c
    PathDiagnostics diag;
};

struct Ensemble {
    SimConfig config;
    std::string strategy;
    long steps_per_path = 0;
    std::vector<double> sample_times;
    std::vector<PathSummary> paths;
    std::vector<PathRecord> records;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct EnsembleDiagnostics {
    long steps = 0;
    long floor_projections = 0;
    long floor_breaches = 0;
    long ratchets = 0;
    long band_violations = 0;
    long cbar_decreases = 0;
    long bankrupt_paths = 0;
    double min_drawdown_slack = 0.0;
    double projection_fraction() const { return steps > 0 ? static_cast<double>(floor_projections) / steps : 0.0; }
};

/// Throws ConfigError for an invalid config or strategy.
void validate_config(const DualSolution& sol, const SimConfig& config, const Strategy& strategy);

Ensemble simulate_serial(const DualSolution& sol, const SimConfig& config, const Strategy& strategy);
Ensemble simulate(const DualSolution& sol, const SimConfig& config, const Strategy& strategy);

EnsembleDiagnostics aggregate_diagnostics(const Ensemble& ens);

/// Sample mean and standard error of Y_t - Y_0. t must be 0 or a sample time.
Estimate estimate_Y_drift(const Ensemble& ens, double t);

struct BudgetCheck {
    double w0 = 0.0;
    double horizon = 0.0;
    Estimate consumption_value;  ///< E[int_0^T zeta c dt]
    std::vector<double> times;
    std::vector<Estimate> Z_mean;
    bool Z_nonincreasing = true;  ///< successive means never rise by more than 3 paired stderrs
    bool within_budget() const { return consumption_value.mean <= w0 + 3.0 * consumption_value.std_error; }
};

BudgetCheck estimate_budget(const Ensemble& ens);

struct DecayPoint {
    double t = 0.0;
    Estimate value;
};

/// Sample means of e^{-rho t} V(w_t, cbar_t); t = 0 gives V(w0, cbar0).
std::vector<DecayPoint> residual_decay(const Ensemble& ens, const std::vector<double>& t_grid);

}  // namespace drawdown
