#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rcar {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumerical = 4,
  kExitAcceptance = 5,
};

/// Entry point of the `rcar` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rcar
