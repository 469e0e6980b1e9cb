#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace jdslc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitComputation = 3;

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`; the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jdslc::cli
