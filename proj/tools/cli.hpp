#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace feamoe::cli {

// Runs the command line `args` (args[0] is the program name). Returns the
// process exit status; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace feamoe::cli
