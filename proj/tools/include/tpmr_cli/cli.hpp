#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tpmr::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitDomain = 4,
  kExitNetwork = 5,
};

/// Runs the tool. `args` excludes the program name. Data goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tpmr::cli
