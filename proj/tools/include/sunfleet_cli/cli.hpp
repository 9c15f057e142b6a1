#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sunfleet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSize = 3;
inline constexpr int kExitDivergence = 4;

// Relative --out paths are resolved under this directory when it is set.
inline constexpr const char* kOutputRootEnv = "SUNFLEET_OUTPUT_ROOT";

// Runs one command line (args[0] is the program name) and returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sunfleet::cli
