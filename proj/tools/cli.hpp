#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hopflab::cli {

// parsed-argv entry point shared by the binary and the tests.  returns the
// process exit code: 0 success, 1 invalid input, 2 numerical non-convergence
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hopflab::cli
