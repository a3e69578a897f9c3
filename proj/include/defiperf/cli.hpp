#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace defiperf {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotWitness = 1,
  kExitInputError = 2,
  kExitTruncated = 3,
  kExitRefuted = 4,
};

/// Runs one `defiperf` invocation. args excludes the program name. The run
/// record goes to `out` (or to --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace defiperf
