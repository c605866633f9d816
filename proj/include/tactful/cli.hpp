#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tactful::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kInput = 2,
    kNumeric = 3,
};

// Runs the command line `args` (args[0] is the program name). Reports go to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tactful::cli
