#pragma once

#include <string>
#include <vector>

namespace slidesync::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitDiagnostics = 2;
inline constexpr int kExitUsage = 64;

/// Runs the command line `args`, where args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace slidesync::cli
