#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ffcs {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitMaxIters = 2,
  kExitInfeasible = 3,
  kExitUsage = 64,
};

/// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace ffcs
