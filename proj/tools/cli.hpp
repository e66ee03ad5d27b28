#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nusavocab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `nusavocab` invocation. `args` excludes the program name.
/// Reports go to `out`; usage messages and machine-readable error reports go
/// to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nusavocab::cli
