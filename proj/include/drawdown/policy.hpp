#pragma once

#include "drawdown/primal.hpp"

#include <optional>

namespace drawdown {

struct PolicyDecision {
    double theta = 0.0;     ///< wealth held in the stock
    double c = 0.0;         ///< consumption rate
    double cbar_new = 0.0;  ///< running max of consumption after the ratchet
    Region region = Region::Floor;
    ValuePoint point;       ///< scaled value at x = w / cbar_new
};

/**
 * Optimal controls at state (w, cbar).
 *
 * The ratchet is applied first, cbar_new = max(cbar, w / a), so x = w / cbar_new
 * never exceeds a. Then theta = (mu - r) / sigma^2 * cbar_new * z J''(z) and
 * consumption is b cbar_new, cbar_new z^{-1/R} (cbar_new / z for log utility)
 * or cbar_new on the three regions below a. At an exact knot the lower region's
 * formula applies. Throws DomainError if x < b/r.
 */
PolicyDecision decide(const DualSolution& sol, double w, double cbar, std::optional<double> z_hint = std::nullopt);

/// (mu - r) / (sigma^2 R), the unconstrained fraction of wealth held in the stock.
double merton_fraction(const ModelParams& params);

}  // namespace drawdown
