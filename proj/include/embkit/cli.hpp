#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace embkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Entry point of the `embkit` tool. `args` excludes the program name.
// Results go to `out`, logs and errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace embkit
