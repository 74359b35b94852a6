#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermoprint::cli {

// Exit codes: 0 success, 1 domain/data error, 2 usage error.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

// Runs the thermoprint command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermoprint::cli
