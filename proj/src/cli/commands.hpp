#pragma once

#include <exception>
#include <string>
#include <vector>

namespace ganeye::cli {

/// Runs one subcommand. Returns 0 on success, 1 on usage, input or contract
/// errors, and 2 on I/O or subprocess failures.
int run(int argc, const char* const* argv);

/// Convenience overload; args[0] is the program name.
int run(const std::vector<std::string>& args);

int exit_code_for(const std::exception& e);

}  // namespace ganeye::cli
