/**
 * @file dual.hpp
 * @brief Closed-form dual function J(z) = sup_x { v(x) - x z }.
 *
 * J is piecewise on (0, z_a], [z_a, 1], [1, z_kink], [z_kink, inf) with
 * z_kink = b^{-R} (power utility) or 1/b (log utility). In each of the last
 * three pieces J is B_i z^{-alpha} + C_i z^{beta} plus a particular solution;
 * on the first piece it solves the ratchet condition V_cbar = 0.
 */

#pragma once

#include "drawdown/model.hpp"
#include "drawdown/region.hpp"

#include <array>

namespace drawdown {

/// Evaluation cap standing in for z_{b/r} = infinity.
inline constexpr double kZMax = 1e9;

struct DualSolution {
    ModelParams params;
    DerivedConstants derived;
    UtilityBranch branch = UtilityBranch::Power;

    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0, F = 0.0, G = 0.0;
    double z_a = 0.0;
    double z_kink = 0.0;

    // Cached for inversion: a = -J'(z_a) and -J'(kZMax).
    double a = 0.0;
    double x_at_zmax = 0.0;

    std::array<double, 3> knots() const { return {z_a, 1.0, z_kink}; }
};

struct DualValue {
    double J = 0.0;
    double Jp = 0.0;
    double Jpp = 0.0;
    Region region = Region::Ratchet;
};

struct RegionBoundaries {
    double x_floor = 0.0;  // b / r
    double x_kink = 0.0;   // -J'(z_kink)
    double x_one = 0.0;    // -J'(1)
    double a = 0.0;        // -J'(z_a)
};

/// Left-hand side of the free-boundary equation whose root in (0,1) is z_a.
double za_equation(double C, const DerivedConstants& derived, const ModelParams& params, double z);

/// Bisection on [1e-12, 1 - 1e-12] then Newton polish. Throws RootNotBracketed.
double find_za(double C, const DerivedConstants& derived, const ModelParams& params);

/// Throws RootNotBracketed when the free-boundary equation has no sign change in (0,1).
DualSolution solve_coefficients(const DerivedConstants& derived, const ModelParams& params);

/// derive() followed by solve_coefficients().
DualSolution solve(const ModelParams& params);

/// Dual piece that owns z. Knots belong to the piece on their right.
Region piece_of(const DualSolution& sol, double z);

/// J, J', J'' of a given piece, evaluated anywhere z > 0 (used to compare pieces at knots).
DualValue eval_piece(const DualSolution& sol, Region piece, double z);

/// Throws DomainError for z <= 0.
DualValue eval_J(const DualSolution& sol, double z);

/// J(z) + x z evaluated without cancelling the affine term against x z.
double legendre_value(const DualSolution& sol, double z, double x);

/// Throws OrderingViolation unless b/r < x_kink < x_one < a.
RegionBoundaries region_boundaries(const DualSolution& sol);

/// Governing ODE of z's piece, normalised by max(1, |J(z)|).
/// Throws DomainError for z <= 0 or z within 1e-14 (relative) of a knot.
double ode_residual(const DualSolution& sol, double z);

}  // namespace drawdown
