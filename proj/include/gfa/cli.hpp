#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gfa::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 runtime or data error, 2 usage error. `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gfa::cli
