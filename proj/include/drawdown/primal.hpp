/**
 * @file primal.hpp
 * @brief Scaled value function v(x) = inf_z { J(z) + x z } and the full value
 *        function V(w, cbar).
 *
 * Power utility: V(w, cbar) = cbar^{1-R} v(w / cbar).
 * Log utility:   V(w, cbar) = v(w / cbar) + log(cbar) / rho.
 */

#pragma once

#include "drawdown/dual.hpp"

#include <optional>
#include <vector>

namespace drawdown {

struct ValuePoint {
    double x = 0.0;
    double v = 0.0;
    double vp = 0.0;  ///< v'(x) = z; +inf at the floor
    Region region = Region::Floor;
};

/// Relative tolerance below b/r that is still mapped onto the floor.
inline constexpr double kFloorSnap = 1e-12;

/**
 * Inverts the dual at x >= b/r.
 *
 * On (b/r, a] solves -J'(z) = x for z in [z_a, kZMax] by safeguarded Newton in
 * log z; above a the ratchet-region closed form is used, and x = b/r returns
 * v = U(b)/rho. A hint close to the answer only shortens the iteration.
 * Throws DomainError for x < b/r.
 */
ValuePoint invert_dual(const DualSolution& sol, double x, std::optional<double> z_hint = std::nullopt);

/// Closed-form v on [b/r, x_kink] and [a, inf); nullopt on the inner two regions.
std::optional<double> explicit_value(const DualSolution& sol, double x);

/// Throws InvalidParams if cbar <= 0, DomainError if w / cbar < b/r.
double value_function(const DualSolution& sol, double w, double cbar);

/// n evenly spaced points on [x_lo, x_hi]; requires b/r <= x_lo < x_hi and n >= 2.
std::vector<ValuePoint> v_grid(const DualSolution& sol, double x_lo, double x_hi, int n);

}  // namespace drawdown
