#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace antroute {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInternal = 3;

// Entry point shared by the executable and the tests. `args` excludes the
// program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace antroute
