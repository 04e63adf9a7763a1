#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gridwarp::cli {

enum ExitCode { ok = 0, bad_input = 2, under_determined = 3, non_convergence = 4 };

/// Runs one command line (args excludes the program name). Reports go to
/// out, errors to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridwarp::cli
