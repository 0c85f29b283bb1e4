#pragma once

#include <iosfwd>

namespace qtomo::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,    ///< unexpected internal error
  kUsage = 2,      ///< bad flags, paths, config or input files
  kNumerical = 3,  ///< numerical failure inside an estimator
};

/// Entry point shared by the `qtomo` binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qtomo::cli
