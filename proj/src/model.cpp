#include "drawdown/model.hpp"

#include "drawdown/error.hpp"

#include <cmath>
#include <sstream>

namespace drawdown {

UtilityBranch ModelParams::utility_branch() const {
    return std::abs(R - 1.0) <= kLogBranchTolerance ? UtilityBranch::Log : UtilityBranch::Power;
}

ModelParams reference_params() {
    return ModelParams{.r = 0.05, .mu = 0.14, .sigma = 0.35, .rho = 0.02, .R = 2.0, .b = 0.7};
}

double characteristic(const ModelParams& params, double kappa, double t) {
    return 0.5 * kappa * kappa * t * (t - 1.0) + (params.rho - params.r) * t - params.rho;
}

std::vector<std::string> validate_fields(const ModelParams& p) {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) {
            out.push_back(std::string(name) + " must be finite");
            return false;
        }
        return true;
    };
    if (finite(p.r, "r") && !(p.r > 0.0)) out.emplace_back("r must be > 0");
    if (finite(p.mu, "mu") && std::isfinite(p.r) && !(p.mu > p.r)) out.emplace_back("mu must be > r");
    if (finite(p.sigma, "sigma") && !(p.sigma > 0.0)) out.emplace_back("sigma must be > 0");
    if (finite(p.rho, "rho") && !(p.rho > 0.0)) out.emplace_back("rho must be > 0");
    if (finite(p.R, "R") && !(p.R > 0.0)) out.emplace_back("R must be > 0");
    if (finite(p.b, "b") && !(p.b > 0.0 && p.b < 1.0)) out.emplace_back("b must lie in (0,1)");
    return out;
}

namespace {

DerivedConstants constants_unchecked(const ModelParams& p) {
    DerivedConstants d;
    d.kappa = (p.mu - p.r) / p.sigma;
    const double k2 = d.kappa * d.kappa;
    d.R_prime = 1.0 / p.R;
    d.gamma_M = (p.rho - (1.0 - p.R) * (p.r + k2 / (2.0 * p.R))) / p.R;

    // R* is the positive root of 2r R^2 + 2 (rho - r + k2/2) R - k2 = 0.
    const double s = p.rho - p.r + 0.5 * k2;
    const double root = std::sqrt(s * s + 2.0 * p.r * k2);
    d.R_star = s > 0.0 ? k2 / (s + root) : (root - s) / (2.0 * p.r);

    // Q(t) = a t^2 + b t + c with c = -rho < 0, so the roots have opposite signs.
    const double qa = 0.5 * k2;
    const double qb = p.rho - p.r - 0.5 * k2;
    const double qc = -p.rho;
    const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
    const double q = -0.5 * (qb + std::copysign(disc, qb));
    const double t1 = q / qa;
    const double t2 = qc / q;
    d.beta = std::max(t1, t2);
    d.alpha = -std::min(t1, t2);
    return d;
}

}  // namespace

std::vector<std::string> validate(const ModelParams& p) {
    auto out = validate_fields(p);
    if (out.empty()) {
        const auto d = constants_unchecked(p);
        if (!(p.R > d.R_star)) {
            std::ostringstream os;
            os.precision(17);
            os << "R must be > R* = " << d.R_star << " (well-posedness)";
            out.push_back(os.str());
        }
    }
    return out;
}

DerivedConstants compute_constants(const ModelParams& p) {
    const auto problems = validate_fields(p);
    if (!problems.empty()) {
        std::string msg;
        for (const auto& s : problems) msg += (msg.empty() ? "" : "; ") + s;
        throw Error(ErrorCode::InvalidParams, msg);
    }
    return constants_unchecked(p);
}

DerivedConstants derive(const ModelParams& p) {
    auto d = compute_constants(p);
    if (!(p.R > d.R_star)) {
        std::ostringstream os;
        os.precision(17);
        os << "R = " << p.R << " does not exceed R* = " << d.R_star;
        throw Error(ErrorCode::IllPosed, os.str());
    }
    return d;
}

double utility(const ModelParams& p, double c) {
    if (p.utility_branch() == UtilityBranch::Log) return std::log(c);
    return std::pow(c, 1.0 - p.R) / (1.0 - p.R);
}

}  // namespace drawdown
