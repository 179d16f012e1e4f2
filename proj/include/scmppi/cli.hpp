#pragma once

#include <string>
#include <vector>

namespace scmppi {

// Runs one CLI command (args exclude the program name). Exit codes:
// 0 success, 1 usage error, 2 data/config error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace scmppi
