#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dafr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPipeline = 3;

/// Runs the `dafr` command line. `args` excludes the program name. Errors are
/// reported on `err` as a single `error[<code>]: <message>` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dafr::cli
