// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 2 usage error, 3 data
// error, 4 infeasible or empty result.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace effsearch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInfeasible = 4;

inline constexpr const char* kToolVersion = "0.1.0";

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace effsearch::cli
