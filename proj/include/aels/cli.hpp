#pragma once
// Command-line front end. Exit codes: 0 success, 1 domain rejection, 2 usage
// error. Machine-readable output goes to `out`, diagnostics to `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace aels {

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aels
