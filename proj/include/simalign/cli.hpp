#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace simalign::cli {

// Exit codes. Verdict-bearing codes let a pipeline gate on the outcome.
inline constexpr int kExitAligned = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMisaligned = 3;
inline constexpr int kExitInconclusive = 4;

// Runs `simalign <args...>` (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace simalign::cli
