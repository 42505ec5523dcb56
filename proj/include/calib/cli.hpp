#pragma once

#include <iosfwd>

namespace calib {

inline constexpr const char* kToolVersion = "calib 1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitConfig = 2,
  kExitRefused = 3,
};

// Entry point for the `calib` executable. Subcommands: gen-real, grid,
// calibrate, compare, report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace calib
