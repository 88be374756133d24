#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evtest::cli {

enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Runs the command line `args` (program name excluded). Output is written to
/// `out` only when the whole command succeeds; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evtest::cli
