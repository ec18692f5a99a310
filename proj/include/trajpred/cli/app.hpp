#pragma once

namespace trajpred::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Parses the command line and runs one subcommand. Returns the process exit
/// code; diagnostics go to stderr.
int run(int argc, char** argv);

}  // namespace trajpred::cli
