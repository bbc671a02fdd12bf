#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace explore::cli {

/// Runs one command line (args[0] is the program name). Results go to `out`, diagnostics to `err`.
/// Returns 0 on success, 1 on a usage or input error, 2 on an internal error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace explore::cli
