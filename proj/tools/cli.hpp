#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace parapc::cli {

/// Runs the parapc command line. Returns the process exit code: 0 on
/// success, 1 for usage/validation errors, 2 for runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace parapc::cli
