#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace afmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitParameter = 2;
inline constexpr int kExitVerification = 3;

/// Runs one `afmm` subcommand. Returns the process exit status.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

/// "a..b" (inclusive), "a,b,c" or a single value. "inf" stands for the
/// unbounded depth.
std::vector<int> parse_int_range(const std::string& text);

}  // namespace afmm::cli
