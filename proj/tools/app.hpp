#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace loopcool::cli {

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_unstable = 3 };

// Shortest round-trip representation; NaN is "nan".
std::string format_double(double v);

// Full CSV text for a resolved sweep, metadata header included.
std::string sweep_csv(const Resolved& run, const std::string& timestamp);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loopcool::cli
