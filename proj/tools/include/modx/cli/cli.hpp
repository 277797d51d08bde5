#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modx::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // unreadable/invalid input files, I/O errors
inline constexpr int kExitUsage = 2;    // bad command line or parameter values

// Runs the tool. `args` excludes the program name. Documents go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modx::cli
