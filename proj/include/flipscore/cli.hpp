#pragma once

#include <iosfwd>

namespace flipscore {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

/// Entry point of the `flipscore` tool with its `test` and `simulate`
/// subcommands. Reports go to `out` unless --out names a file; messages go
/// to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flipscore
