#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace degreelab::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Short git revision the library was built from, or "unknown".
std::string_view build_id();

/// Runs one subcommand. args excludes the program name. Results go to `out`
/// (or the --output file), diagnostics and usage to `err`.
/// Exit codes: 0 success, 2 invalid arguments, 3 insufficient resolution,
/// 4 resource limit, 1 anything else.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace degreelab::cli
