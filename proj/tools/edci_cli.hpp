#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edci::cli {

/// Exit codes: 0 on success, 1 when the pipeline fails (bad data, I/O,
/// numerical errors), 2 on usage errors.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (args[0] is the program name). Summaries go
/// to `out`, diagnostics to `err`; everything machine-readable goes to files.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace edci::cli
