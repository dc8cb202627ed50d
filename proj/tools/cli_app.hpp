#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace depthhints::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kNumeric = 3,
};

/// Runs the command line `args` (args[0] is the program name). Results go to
/// files and `out`; diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace depthhints::cli
