#include "drawdown/io.hpp"

#include "drawdown/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace drawdown::io {

namespace {
constexpr std::array<const char*, 6> kParamKeys{"r", "mu", "sigma", "rho", "R", "b"};
}

ModelParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "parameter config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : kParamKeys) known = known || key == k;
        if (!known) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    }
    auto get = [&](const char* key) {
        if (!j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("missing config key '") + key + "'");
        const auto& v = j.at(key);
        if (!v.is_number()) throw Error(ErrorCode::ConfigError, std::string("config key '") + key + "' must be a number");
        return v.get<double>();
    };
    return ModelParams{get("r"), get("mu"), get("sigma"), get("rho"), get("R"), get("b")};
}

nlohmann::json params_to_json(const ModelParams& p) {
    return {{"r", p.r}, {"mu", p.mu}, {"sigma", p.sigma}, {"rho", p.rho}, {"R", p.R}, {"b", p.b}};
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, "cannot parse '" + path + "': " + e.what());
    }
}

ModelParams load_params(const std::string& path) { return params_from_json(read_json_file(path)); }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

nlohmann::json solution_to_json(const DualSolution& sol, const RegionBoundaries& rb) {
    const auto& d = sol.derived;
    nlohmann::json j;
    j["params"] = params_to_json(sol.params);
    j["branch"] = sol.branch == UtilityBranch::Log ? "log" : "power";
    j["derived"] = {{"kappa", d.kappa},   {"gamma_M", d.gamma_M}, {"R_star", d.R_star},
                    {"alpha", d.alpha},   {"beta", d.beta},       {"R_prime", d.R_prime}};
    j["coefficients"] = {{"A", sol.A}, {"B", sol.B}, {"C", sol.C}, {"D", sol.D},
                         {"E", sol.E}, {"F", sol.F}, {"G", sol.G}};
    j["z_a"] = sol.z_a;
    j["knots"] = {sol.z_a, 1.0, sol.z_kink};
    j["boundaries"] = {{"x_floor", rb.x_floor}, {"x_kink", rb.x_kink}, {"x_one", rb.x_one}, {"a", rb.a}};
    return j;
}

std::string value_table_csv(const std::vector<ValuePoint>& points) {
    std::string out = "x,v,vp,region\n";
    for (const auto& p : points) {
        out += format_double(p.x) + ',' + format_double(p.v) + ',' + format_double(p.vp) + ',' +
               std::string(to_string(p.region)) + '\n';
    }
    return out;
}

std::string policy_table_csv(const std::vector<PolicyRow>& rows) {
    std::string out = "x,theta_over_cbar,c_over_cbar,region\n";
    for (const auto& r : rows) {
        out += format_double(r.x) + ',' + format_double(r.theta_over_cbar) + ',' + format_double(r.c_over_cbar) + ',' +
               std::string(to_string(r.region)) + '\n';
    }
    return out;
}

std::string path_csv(const PathRecord& rec) {
    std::string out = "t,S,w,cbar,x,theta,c,region\n";
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
        out += format_double(rec.t[k]) + ',' + format_double(rec.S[k]) + ',' + format_double(rec.w[k]) + ',' +
               format_double(rec.cbar[k]) + ',' + format_double(rec.x[k]) + ',' + format_double(rec.theta[k]) + ',' +
               format_double(rec.c[k]) + ',' + std::string(to_string(rec.region[k])) + '\n';
    }
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write output file '" + path + "'");
    out << content;
    if (!out) throw Error(ErrorCode::ConfigError, "failed writing output file '" + path + "'");
}

}  // namespace drawdown::io
