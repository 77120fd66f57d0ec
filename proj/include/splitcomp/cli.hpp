// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace splitcomp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line. `args` excludes the program name. Usage errors
/// print the message and help to `err` and return 2; toolkit errors print a
/// one-line diagnostic and return 1.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace splitcomp::cli
