#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genet::cli {

enum ExitCode : int {
  kSuccess = 0,
  kDomainError = 1,
  kUsageError = 2,
};

/// Runs the `genet` command line. `args` excludes the program name. Data goes
/// to `out` (or the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace genet::cli
