/**
 * @file model.hpp
 * @brief Market and preference inputs for the drawdown-constrained Merton
 *        problem, plus the constants every other module derives from them.
 */

#pragma once

#include <string>
#include <vector>

namespace drawdown {

enum class UtilityBranch { Power, Log };

/// |R - 1| at or below this routes to the logarithmic utility branch.
inline constexpr double kLogBranchTolerance = 1e-12;

struct ModelParams {
    double r = 0.0;      ///< risk-free rate
    double mu = 0.0;     ///< stock drift
    double sigma = 0.0;  ///< stock volatility
    double rho = 0.0;    ///< discount rate
    double R = 0.0;      ///< relative risk aversion
    double b = 0.0;      ///< drawdown fraction, c >= b * running max of c

    UtilityBranch utility_branch() const;
};

/// Parameter set used for the reference figures: b=0.7, R=2, rho=0.02, r=0.05, sigma=0.35, mu=0.14.
ModelParams reference_params();

struct DerivedConstants {
    double kappa = 0.0;    ///< market price of risk (mu - r) / sigma
    double gamma_M = 0.0;  ///< Merton consumption rate
    double R_star = 0.0;   ///< critical risk aversion; well-posed iff R > R_star
    double alpha = 0.0;    ///< -alpha is the negative root of Q
    double beta = 0.0;     ///< root of Q greater than one
    double R_prime = 0.0;  ///< 1 / R
};

/// Q(t) = kappa^2 t (t - 1) / 2 + (rho - r) t - rho.
double characteristic(const ModelParams& params, double kappa, double t);

/// Field-level bounds only (positivity, mu > r, 0 < b < 1). Each entry names the field and bound.
std::vector<std::string> validate_fields(const ModelParams& params);

/// All invariants, including well-posedness R > R*.
std::vector<std::string> validate(const ModelParams& params);

/// Derived constants without the well-posedness check. Throws InvalidParams on field violations.
DerivedConstants compute_constants(const ModelParams& params);

/// Throws InvalidParams on field violations and IllPosed when R <= R*.
DerivedConstants derive(const ModelParams& params);

/// CRRA utility for the branch selected by params.
double utility(const ModelParams& params, double c);

}  // namespace drawdown
