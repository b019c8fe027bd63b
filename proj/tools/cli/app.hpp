#pragma once

#include <iostream>

namespace ceqcli {

/// Full command-line run. Returns the process exit status: 0 success,
/// 2 validation error, 3 numerical or fit error.
int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace ceqcli
