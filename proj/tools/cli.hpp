#pragma once

#include <string>
#include <vector>

namespace hpanel::cli {

/// Runs one command line (args exclude the program name) and returns the process exit code:
/// 0 success, 2 validation, 3 numeric, 4 I/O.
int run(const std::vector<std::string>& args);

}  // namespace hpanel::cli
