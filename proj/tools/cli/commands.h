#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace driftqec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one invocation of the command-line tool. `args` excludes the program
/// name. Returns the process exit code.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace driftqec::cli
