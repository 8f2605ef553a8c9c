#include "drawdown/dual.hpp"

#include "drawdown/error.hpp"

#include <cmath>
#include <sstream>

namespace drawdown {

namespace {

bool is_log(const DualSolution& sol) { return sol.branch == UtilityBranch::Log; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Coefficient multiplying C z^beta in the free-boundary equation.
double za_leading(const DerivedConstants& d, const ModelParams& p) {
    const double ab = d.alpha + d.beta;
    if (p.utility_branch() == UtilityBranch::Log) return d.beta * ab;
    return ab * (p.R * (d.beta - 1.0) + 1.0);
}

// Homogeneous part c1 z^{-alpha} + c2 z^{beta} with derivatives.
struct Homogeneous {
    double h, hp, hpp;
};

Homogeneous homogeneous(const DerivedConstants& d, double c1, double c2, double z) {
    const double zm = std::pow(z, -d.alpha);
    const double zp = c2 == 0.0 ? 0.0 : std::pow(z, d.beta);
    const double t1 = c1 * zm;
    const double t2 = c2 * zp;
    return {t1 + t2,
            (-d.alpha * t1 + d.beta * t2) / z,
            (d.alpha * (d.alpha + 1.0) * t1 + d.beta * (d.beta - 1.0) * t2) / (z * z)};
}

}  // namespace

double za_equation(double C, const DerivedConstants& d, const ModelParams& p, double z) {
    return za_leading(d, p) * C * std::pow(z, d.beta) - (d.alpha + 1.0) * z / p.r + d.alpha / p.rho;
}

namespace {

// Sign-change bisection on [lo, hi] followed by a few guarded Newton steps.
template <class G, class Gp>
double bracketed_root(G g, Gp gp, double lo, double hi) {
    double g_lo = g(lo);
    const double g_hi = g(hi);
    if (g_lo * g_hi > 0.0) {
        throw Error(ErrorCode::RootNotBracketed,
                    "free-boundary equation has no sign change in (0,1): g(lo)=" + fmt(g_lo) + ", g(hi)=" +
                        fmt(g_hi) + (std::abs(g_hi) < 1e-10 ? " (z_a is within rounding of 1)" : ""));
    }
    for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g(mid);
        if (g_mid == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    double z = 0.5 * (lo + hi);
    double gz = g(z);
    for (int it = 0; it < 8 && gz != 0.0; ++it) {
        const double d = gp(z);
        if (d == 0.0) break;
        const double z_new = z - gz / d;
        if (!(z_new > 0.0 && z_new < 1.0)) break;
        const double g_new = g(z_new);
        if (!(std::abs(g_new) < std::abs(gz))) break;
        z = z_new;
        gz = g_new;
    }
    return z;
}

double za_slope(double C, const DerivedConstants& d, const ModelParams& p, double z) {
    return za_leading(d, p) * C * d.beta * std::pow(z, d.beta - 1.0) - (d.alpha + 1.0) / p.r;
}

// The solved C satisfies alpha/rho = (alpha+1)/r + K with K = leading C / (b_pow - 1), so
//   g(z) = K (1 - z^beta) + K b_pow z^beta + (alpha+1)(1 - z)/r,
// which keeps its relative accuracy as z -> 1 where g(1) = K b_pow is tiny.
double find_za_solved(double K, double b_pow, const DerivedConstants& d, const ModelParams& p) {
    auto g = [&](double z) {
        const double zb = std::pow(z, d.beta);
        return -K * std::expm1(d.beta * std::log(z)) + K * b_pow * zb + (d.alpha + 1.0) * (1.0 - z) / p.r;
    };
    auto gp = [&](double z) {
        return K * (b_pow - 1.0) * d.beta * std::pow(z, d.beta - 1.0) - (d.alpha + 1.0) / p.r;
    };
    return bracketed_root(g, gp, 1e-12, std::nextafter(1.0, 0.0));
}

}  // namespace

double find_za(double C, const DerivedConstants& d, const ModelParams& p) {
    if (!std::isfinite(C)) throw Error(ErrorCode::RootNotBracketed, "C is not finite");
    return bracketed_root([&](double z) { return za_equation(C, d, p, z); },
                          [&](double z) { return za_slope(C, d, p, z); }, 1e-12, 1.0 - 1e-12);
}

DualSolution solve_coefficients(const DerivedConstants& d, const ModelParams& p) {
    DualSolution s;
    s.params = p;
    s.derived = d;
    s.branch = p.utility_branch();
    const double al = d.alpha;
    const double be = d.beta;
    const double ab = al + be;
    const double r = p.r;
    const double rho = p.rho;
    const double b = p.b;

    if (s.branch == UtilityBranch::Power) {
        const double R = p.R;
        const double gm = d.gamma_M;
        const double k_ce = (R * (al + 1.0) - 1.0) / (R * gm) - (al + 1.0) / r;
        const double b_pow = std::pow(b, 1.0 + R * (be - 1.0));
        s.C = (b_pow - 1.0) / (be * ab) * k_ce;
        s.z_a = find_za_solved(za_leading(d, p) * k_ce / (be * ab), b_pow, d, p);
        const double za = s.z_a;
        s.A = std::pow(za, d.R_prime - 1.0) / gm * (1.0 / (1.0 - R) - za);
        s.B = std::pow(za, al) / (ab * (R * (al + 1.0) - 1.0)) * (be / rho + (1.0 - be) * za / r);
        const double k_df = (be - 1.0) / r - (1.0 + R * (be - 1.0)) / (R * gm);
        s.D = s.B + k_df / (al * ab);
        s.E = b_pow / (be * ab) * k_ce;
        s.F = s.B + (1.0 - std::pow(b, 1.0 - R * (al + 1.0))) / (al * ab) * k_df;
        s.z_kink = std::pow(b, -R);
    } else {
        const double k_ce = al / rho - (al + 1.0) / r;
        const double b_pow = std::pow(b, be);
        s.C = (b_pow - 1.0) / (be * ab) * k_ce;
        s.z_a = find_za_solved(k_ce, b_pow, d, p);
        const double za = s.z_a;
        const double k_b = be / rho - (be - 1.0) * za / r;
        s.A = k_b / (al * ab) + ((al + 1.0) * za / r - al / rho) / (be * ab) - za / r + std::log(za) / rho;
        s.B = std::pow(za, al) / (al * ab) * k_b;
        s.D = s.B + ((be - 1.0) / r - be / rho) / (al * ab);
        s.E = b_pow / (be * ab) * k_ce;
        s.F = s.B + (std::pow(b, -al) - 1.0) / (al * ab) * (be / rho - (be - 1.0) / r);
        s.z_kink = 1.0 / b;
    }
    s.G = 0.0;
    s.a = -eval_J(s, s.z_a).Jp;
    s.x_at_zmax = -eval_J(s, kZMax).Jp;
    return s;
}

DualSolution solve(const ModelParams& params) { return solve_coefficients(derive(params), params); }

Region piece_of(const DualSolution& sol, double z) {
    if (z < sol.z_a) return Region::Ratchet;
    if (z < 1.0) return Region::RatchetWait;
    if (z < sol.z_kink) return Region::Interior;
    return Region::DrawdownBound;
}

DualValue eval_piece(const DualSolution& sol, Region piece, double z) {
    const auto& p = sol.params;
    const auto& d = sol.derived;
    const bool log_branch = is_log(sol);
    DualValue out;
    out.region = piece;
    switch (piece) {
        case Region::Ratchet: {
            if (log_branch) {
                out.J = -std::log(z) / p.rho + sol.A;
                out.Jp = -1.0 / (p.rho * z);
                out.Jpp = 1.0 / (p.rho * z * z);
            } else {
                const double e = 1.0 - d.R_prime;
                const double t = sol.A * std::pow(z, e);
                out.J = t;
                out.Jp = e * t / z;
                out.Jpp = e * (e - 1.0) * t / (z * z);
            }
            break;
        }
        case Region::RatchetWait: {
            const auto h = homogeneous(d, sol.B, sol.C, z);
            out.J = h.h - z / p.r + (log_branch ? 0.0 : utility(p, 1.0) / p.rho);
            out.Jp = h.hp - 1.0 / p.r;
            out.Jpp = h.hpp;
            break;
        }
        case Region::Interior: {
            const auto h = homogeneous(d, sol.D, sol.E, z);
            if (log_branch) {
                const double k2 = d.kappa * d.kappa;
                out.J = h.h - (std::log(z) + 1.0) / p.rho - (p.rho - p.r - 0.5 * k2) / (p.rho * p.rho);
                out.Jp = h.hp - 1.0 / (p.rho * z);
                out.Jpp = h.hpp + 1.0 / (p.rho * z * z);
            } else {
                const double e = 1.0 - d.R_prime;
                const double t = std::pow(z, e) / (d.gamma_M * e);
                out.J = h.h - t;
                out.Jp = h.hp - e * t / z;
                out.Jpp = h.hpp - e * (e - 1.0) * t / (z * z);
            }
            break;
        }
        case Region::DrawdownBound:
        case Region::Floor: {
            const auto h = homogeneous(d, sol.F, sol.G, z);
            out.J = h.h - p.b / p.r * z + utility(p, p.b) / p.rho;
            out.Jp = h.hp - p.b / p.r;
            out.Jpp = h.hpp;
            out.region = Region::DrawdownBound;
            break;
        }
    }
    return out;
}

DualValue eval_J(const DualSolution& sol, double z) {
    if (!(z > 0.0)) throw Error(ErrorCode::DomainError, "J requires z > 0, got z=" + fmt(z));
    return eval_piece(sol, piece_of(sol, z), z);
}

double legendre_value(const DualSolution& sol, double z, double x) {
    const auto& p = sol.params;
    const auto& d = sol.derived;
    switch (piece_of(sol, z)) {
        case Region::RatchetWait: {
            const auto h = homogeneous(d, sol.B, sol.C, z);
            const double u1 = is_log(sol) ? 0.0 : utility(p, 1.0) / p.rho;
            return h.h + (x - 1.0 / p.r) * z + u1;
        }
        case Region::DrawdownBound:
        case Region::Floor: {
            const auto h = homogeneous(d, sol.F, sol.G, z);
            return h.h + (x - p.b / p.r) * z + utility(p, p.b) / p.rho;
        }
        default:
            return eval_J(sol, z).J + x * z;
    }
}

RegionBoundaries region_boundaries(const DualSolution& sol) {
    RegionBoundaries rb;
    rb.x_floor = sol.params.b / sol.params.r;
    rb.x_kink = -eval_J(sol, sol.z_kink).Jp;
    rb.x_one = -eval_J(sol, 1.0).Jp;
    rb.a = -eval_J(sol, sol.z_a).Jp;
    if (!(rb.x_floor < rb.x_kink && rb.x_kink < rb.x_one && rb.x_one < rb.a)) {
        throw Error(ErrorCode::OrderingViolation,
                    "expected b/r < x_kink < x_one < a, got " + fmt(rb.x_floor) + ", " + fmt(rb.x_kink) +
                        ", " + fmt(rb.x_one) + ", " + fmt(rb.a));
    }
    return rb;
}

double ode_residual(const DualSolution& sol, double z) {
    if (!(z > 0.0)) throw Error(ErrorCode::DomainError, "ODE residual requires z > 0, got z=" + fmt(z));
    for (double k : sol.knots()) {
        if (std::abs(z - k) <= 1e-14 * k) {
            throw Error(ErrorCode::DomainError, "z=" + fmt(z) + " collides with knot " + fmt(k));
        }
    }
    const auto& p = sol.params;
    const auto& d = sol.derived;
    const auto v = eval_J(sol, z);
    double res = 0.0;
    if (v.region == Region::Ratchet) {
        res = is_log(sol) ? 1.0 / p.rho + v.Jp * z : (1.0 - p.R) * v.J + p.R * v.Jp * z;
    } else {
        const double k2 = d.kappa * d.kappa;
        res = -p.rho * v.J + (p.rho - p.r) * z * v.Jp + 0.5 * k2 * z * z * v.Jpp;
        switch (v.region) {
            case Region::RatchetWait:
                res += utility(p, 1.0) - z;
                break;
            case Region::Interior:
                if (is_log(sol)) {
                    res += -std::log(z) - 1.0;
                } else {
                    const double e = 1.0 - d.R_prime;
                    res += -std::pow(z, e) / e;
                }
                break;
            default:
                res += utility(p, p.b) - p.b * z;
                break;
        }
    }
    return res / std::max(1.0, std::abs(v.J));
}

}  // namespace drawdown
