#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace urlnet {

// Runs the command-line tool on args (without the program name) and returns
// the process exit code: 0 ok, 1 usage, 2 data error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace urlnet
