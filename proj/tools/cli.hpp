#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace learn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

// Entry point for `learn <subcommand> ...` (args exclude the program name).
// Failures print exactly one `error: <category>: <detail>` line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace learn::cli
