#pragma once

#include <string>
#include <vector>

namespace pqlm::cli {

// Full command-line driver. Exit codes: 0 success, 1 runtime failure,
// 2 usage error (unknown flag or subcommand, missing arguments).
int run(int argc, const char* const* argv);

// Convenience overload for tests; args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace pqlm::cli
