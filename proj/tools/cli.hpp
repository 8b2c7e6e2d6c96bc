// Command-line front end: simulate, sweep, optimize, reproduce, show.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace holopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command. `args` excludes the program name. Normal output goes to
/// `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Targets accepted by `reproduce`.
const std::vector<std::string>& reproduce_targets();

}  // namespace holopt::cli
