#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spinflow {

// Runs one command line (without the program name). Artifacts go to `out`
// unless --output is given; diagnostics go to `err`. Returns the exit code:
// 0 success, 1 a check outside its tolerance, 2 invalid configuration.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinflow
