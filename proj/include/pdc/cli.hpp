#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pdc::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  ///< oracle-check found a nonconforming invariant
  kInputError = 2,
  kIoError = 3,
  kNotConverged = 4,
};

/// Environment variable naming the config file used when --config is absent.
inline constexpr const char* kConfigEnvVar = "PDCSIM_CONFIG";

/// Run the tool with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pdc::cli
