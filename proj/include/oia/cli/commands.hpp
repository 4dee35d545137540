#pragma once

#include <ostream>
#include <span>
#include <string>

namespace oia::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kDataError = 3, kNumericAbort = 4 };

// Runs one command line (args[0] is the program name). Normal output goes to
// out, diagnostics to err.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace oia::cli
