#pragma once

#include <iosfwd>

namespace dfmforge::service {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFindings = 1,  // validation violations, failed op, domain errors
  kExitUsage = 2,     // bad flags, unreadable or unparsable input
};

/// Entry point of the `dfmforge` tool. Output goes to `out`, diagnostics to
/// `err`; nothing is written to the process streams directly, so tests can
/// run commands in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfmforge::service
