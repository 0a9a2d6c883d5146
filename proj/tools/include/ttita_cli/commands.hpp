#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ttita::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kMissingFile = 2;
inline constexpr int kUsage = 64;

/// Parses `args` (without the program name) and runs the subcommand.
/// Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ttita::cli
