// Command-line driver: asm, unroll, schedule, sim, sweep.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pipeforge {

// args excludes the program name. Returns the process exit code:
// 0 success, 1 user error, 2 internal error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pipeforge
