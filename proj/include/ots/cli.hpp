#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ots {

// Command line front end. args excludes the program name. Returns 0 on
// success, 2 on invalid input and 3 when a solve fails.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace ots
