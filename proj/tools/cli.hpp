#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rangelsh::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2, kInvariantError = 3 };

/// Runs the mipsbench command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rangelsh::cli
