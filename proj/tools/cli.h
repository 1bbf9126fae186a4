#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace defirisk::cli {

/// Runs one `defirisk` subcommand. Returns the process exit code:
/// 0 success, 2 input/validation error, 3 solver non-convergence, 4 I/O error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace defirisk::cli
