#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace intentsketch::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a check failed or a pipeline stage gave up
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;
inline constexpr int kExitParse = 4;

/// Runs the command line `args` (without the program name). Machine-readable
/// output goes to `out`, human-readable logs to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace intentsketch::cli
