#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iva {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `iva` command line (without the program name). Records go to
/// `out`, diagnostics and log messages to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace iva
