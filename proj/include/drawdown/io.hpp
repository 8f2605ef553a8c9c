#pragma once

#include "drawdown/dual.hpp"
#include "drawdown/primal.hpp"
#include "drawdown/sim.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace drawdown::io {

/// Reads exactly the keys r, mu, sigma, rho, R, b. Throws ConfigError on unknown, missing or non-numeric keys.
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ModelParams& params);

/// Throws ConfigError naming the path when the file cannot be read or parsed.
nlohmann::json read_json_file(const std::string& path);
ModelParams load_params(const std::string& path);

/// 17 significant digits, '.' separator, independent of the global locale.
std::string format_double(double v);

nlohmann::json solution_to_json(const DualSolution& sol, const RegionBoundaries& bounds);

std::string value_table_csv(const std::vector<ValuePoint>& points);

struct PolicyRow {
    double x = 0.0;
    double theta_over_cbar = 0.0;
    double c_over_cbar = 0.0;
    Region region = Region::Floor;
};
std::string policy_table_csv(const std::vector<PolicyRow>& rows);

std::string path_csv(const PathRecord& record);

/// Throws ConfigError when the file cannot be written.
void write_text(const std::string& path, const std::string& content);

}  // namespace drawdown::io
