#include "drawdown/policy.hpp"

#include "drawdown/error.hpp"

#include <algorithm>
#include <cmath>

namespace drawdown {

PolicyDecision decide(const DualSolution& sol, double w, double cbar, std::optional<double> z_hint) {
    const auto& p = sol.params;
    if (!(cbar > 0.0)) throw Error(ErrorCode::InvalidParams, "cbar must be > 0");
    PolicyDecision out;
    out.cbar_new = std::max(cbar, w / sol.a);
    const double x = std::min(w / out.cbar_new, sol.a);
    out.point = invert_dual(sol, x, z_hint);
    out.region = out.point.region;

    if (out.region == Region::Floor) {
        out.theta = 0.0;
        out.c = p.b * out.cbar_new;
        return out;
    }
    const double z = out.point.vp;
    const double curvature = eval_J(sol, z).Jpp;
    out.theta = (p.mu - p.r) / (p.sigma * p.sigma) * out.cbar_new * z * curvature;
    switch (out.region) {
        case Region::DrawdownBound:
            out.c = p.b * out.cbar_new;
            break;
        case Region::Interior:
            out.c = sol.branch == UtilityBranch::Log ? out.cbar_new / z : out.cbar_new * std::pow(z, -1.0 / p.R);
            break;
        default:
            out.c = out.cbar_new;
            break;
    }
    return out;
}

double merton_fraction(const ModelParams& params) {
    return (params.mu - params.r) / (params.sigma * params.sigma * params.R);
}

}  // namespace drawdown
