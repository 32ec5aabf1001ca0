#pragma once

#include <string>
#include <vector>

namespace lrm::cli {

/// Parse and run one subcommand. Returns the process exit code:
/// 0 success, 2 flag-validation error, 1 runtime error. Errors are printed
/// to stderr with an "ERROR <code>:" prefix.
int run(const std::vector<std::string>& args);

} // namespace lrm::cli
