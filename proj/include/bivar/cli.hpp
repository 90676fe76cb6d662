#pragma once

#include <ostream>
#include <span>
#include <string>

namespace bivar {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitInput = 2;

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`. Returns 0 for a clean report, 1 when a violation was
/// found and 2 for unusable input.
int cli_run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace bivar
