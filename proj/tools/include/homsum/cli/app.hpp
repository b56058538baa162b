#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace homsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCapacity = 3;

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace homsum::cli
