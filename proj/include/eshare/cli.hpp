#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eshare/error.hpp"

namespace eshare {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitNoConvergence = 3;

int exit_code_for(Errc code) noexcept;

/// Runs one command line (without the program name). Reports go to `out`
/// (or the --out file), diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eshare
