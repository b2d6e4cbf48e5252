#ifndef RELALG_TOOLS_CLI_HPP
#define RELALG_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace relalg::cli {

// Runs one CLI invocation. Returns the process exit code:
//   0  success
//   2  analysis succeeded but an obstruction was found
//   1  error (bad input, unsupported request, mismatch)
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace relalg::cli

#endif
