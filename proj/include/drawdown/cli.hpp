#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drawdown::cli {

/// Runs one subcommand (solve, table, simulate, verify, illposed, replay).
/// Returns 0 on success, 1 on validation errors, 2 on numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drawdown::cli
