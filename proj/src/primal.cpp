#include "drawdown/primal.hpp"

#include "drawdown/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace drawdown {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double floor_value(const DualSolution& sol) { return utility(sol.params, sol.params.b) / sol.params.rho; }

Region region_of_z(const DualSolution& sol, double z) {
    const auto piece = piece_of(sol, z);
    return piece == Region::Ratchet ? Region::RatchetWait : piece;
}

// Ratchet region (x > a), where J is the first dual piece.
ValuePoint ratchet_point(const DualSolution& sol, double x) {
    const auto& p = sol.params;
    ValuePoint pt{.x = x, .region = Region::Ratchet};
    if (sol.branch == UtilityBranch::Log) {
        pt.v = (std::log(x) + 1.0 + std::log(p.rho)) / p.rho + sol.A;
        pt.vp = 1.0 / (p.rho * x);
    } else {
        const double scale = -sol.A * (1.0 - sol.derived.R_prime);
        pt.v = utility(p, x) * std::pow(scale, p.R);
        pt.vp = std::pow(x / scale, -p.R);
    }
    return pt;
}

// Exact inverse of -J' on the last piece: x - b/r = alpha F z^{-alpha-1}.
double last_piece_z(const DualSolution& sol, double x) {
    const double al = sol.derived.alpha;
    const double excess = x - sol.params.b / sol.params.r;
    return std::pow(excess / (al * sol.F), -1.0 / (al + 1.0));
}

// Solves -J'(e^u) = x for u in [u_lo, u_hi]; f(u) = -J'(e^u) - x is decreasing.
double solve_log_z(const DualSolution& sol, double x, double u_lo, double u_hi, std::optional<double> hint) {
    double u = 0.5 * (u_lo + u_hi);
    if (hint && *hint > 0.0) {
        const double uh = std::log(*hint);
        if (uh > u_lo && uh < u_hi) u = uh;
    }
    for (int it = 0; it < 200; ++it) {
        const double z = std::exp(u);
        const auto dv = eval_J(sol, z);
        const double f = -dv.Jp - x;
        if (f == 0.0) return u;
        if (f > 0.0) {
            u_lo = u;
        } else {
            u_hi = u;
        }
        const double slope = dv.Jpp * z;  // -f'(u)
        double u_next = slope > 0.0 ? u + f / slope : 0.5 * (u_lo + u_hi);
        if (!(u_next > u_lo && u_next < u_hi)) u_next = 0.5 * (u_lo + u_hi);
        const double step = std::abs(u_next - u);
        u = u_next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) break;
        if (u_hi - u_lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) break;
    }
    return u;
}

}  // namespace

ValuePoint invert_dual(const DualSolution& sol, double x, std::optional<double> z_hint) {
    const double floor_x = sol.params.b / sol.params.r;
    if (!(x >= floor_x * (1.0 - kFloorSnap))) {
        throw Error(ErrorCode::DomainError, "x=" + fmt(x) + " lies below the feasibility floor b/r=" + fmt(floor_x));
    }
    if (x <= floor_x) {
        return {.x = x, .v = floor_value(sol), .vp = std::numeric_limits<double>::infinity(), .region = Region::Floor};
    }
    if (x > sol.a) return ratchet_point(sol, x);

    double z = 0.0;
    if (x == sol.a) {
        z = sol.z_a;
    } else if (x < sol.x_at_zmax) {
        z = last_piece_z(sol, x);
    } else {
        z = std::exp(solve_log_z(sol, x, std::log(sol.z_a), std::log(kZMax), z_hint));
    }
    return {.x = x, .v = legendre_value(sol, z, x), .vp = z, .region = region_of_z(sol, z)};
}

std::optional<double> explicit_value(const DualSolution& sol, double x) {
    const auto& p = sol.params;
    const double floor_x = p.b / p.r;
    if (x < floor_x) return std::nullopt;
    if (x > sol.a) return ratchet_point(sol, x).v;
    const double x_kink = -eval_J(sol, sol.z_kink).Jp;
    if (x > x_kink) return std::nullopt;
    const double rs = sol.derived.R_star;
    return std::pow(x - floor_x, 1.0 - rs) / (1.0 - rs) * std::pow(sol.derived.alpha * sol.F, rs) + floor_value(sol);
}

double value_function(const DualSolution& sol, double w, double cbar) {
    if (!(cbar > 0.0)) throw Error(ErrorCode::InvalidParams, "cbar must be > 0, got " + fmt(cbar));
    const auto pt = invert_dual(sol, w / cbar);
    if (sol.branch == UtilityBranch::Log) return pt.v + std::log(cbar) / sol.params.rho;
    return std::pow(cbar, 1.0 - sol.params.R) * pt.v;
}

std::vector<ValuePoint> v_grid(const DualSolution& sol, double x_lo, double x_hi, int n) {
    const double floor_x = sol.params.b / sol.params.r;
    if (n < 2) throw Error(ErrorCode::ConfigError, "grid needs n >= 2, got " + std::to_string(n));
    if (!(x_lo >= floor_x)) {
        throw Error(ErrorCode::DomainError, "grid start " + fmt(x_lo) + " lies below b/r=" + fmt(floor_x));
    }
    if (!(x_lo < x_hi)) throw Error(ErrorCode::ConfigError, "grid needs x_lo < x_hi");
    std::vector<ValuePoint> out;
    out.reserve(static_cast<std::size_t>(n));
    std::optional<double> hint;
    for (int i = 0; i < n; ++i) {
        const double x = i == n - 1 ? x_hi : x_lo + (x_hi - x_lo) * static_cast<double>(i) / (n - 1);
        out.push_back(invert_dual(sol, x, hint));
        if (std::isfinite(out.back().vp)) hint = out.back().vp;
    }
    return out;
}

}  // namespace drawdown
