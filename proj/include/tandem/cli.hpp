#pragma once

#include <iosfwd>

namespace tandem {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailure = 1,
  kExitBadConfig = 2,
  kExitInstability = 3,
  kExitInfeasible = 4,
};

// Parses argv, runs one subcommand and writes its report to out (or to the
// file named by --output).  Diagnostics go to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tandem
