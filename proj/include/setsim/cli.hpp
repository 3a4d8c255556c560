#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace setsim {

// Entry point behind the `setsim` executable. Returns the process exit code:
// 0 ok, 1 usage, 2 input error, 3 invariant violation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace setsim
