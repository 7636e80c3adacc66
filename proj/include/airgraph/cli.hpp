#pragma once

#include <string>
#include <vector>

namespace airgraph {

/// Entry point behind the `airgraph` binary, exposed so tests can drive the
/// commands in-process. Exit codes: 0 success, 1 solver non-convergence or
/// setup abort, 2 usage error, 3 I/O error.
int run_cli(const std::vector<std::string>& args);

}  // namespace airgraph
