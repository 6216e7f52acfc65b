#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace b2w::cli {

// In-process entry point: argv-style arguments without the program name.
// Progress goes to err, command output to out, bulk data to files.
// Returns 0 on success, 1 on usage errors, 2 on runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace b2w::cli
