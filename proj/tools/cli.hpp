#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eae {

// Runs one CLI invocation; `args` excludes the program name. Results go to
// `out`, errors to `err` as a JSON object. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eae
