#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ptbcc::cli {

/// Runs one command line (arguments after the program name) and returns the
/// process exit status: 0 on success, 1 on a module or I/O error, 2 on a
/// command-line or config error. Errors go to `err` as a single JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptbcc::cli
