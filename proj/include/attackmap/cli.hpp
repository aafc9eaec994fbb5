#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attackmap {

/// Exit codes of the attack-mapper command line.
enum ExitCode : int { kExitOk = 0, kExitDomainError = 1, kExitUsage = 2 };

/// Runs one `attack-mapper` invocation. `args` excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attackmap
