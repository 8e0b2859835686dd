#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uaweight::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one invocation of the `uaweight` tool. `args` excludes the program
/// name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uaweight::cli
