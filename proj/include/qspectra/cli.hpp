#ifndef QSPECTRA_CLI_HPP
#define QSPECTRA_CLI_HPP

#include <string>
#include <vector>

namespace qspectra {

/// Command-line front end. `args` excludes the program name.
/// Exit codes: 0 success / all checks pass, 1 check failure,
/// 2 usage error, 3 capacity error.
int run_cli(std::vector<std::string> args);

}  // namespace qspectra

#endif
