#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cuspmdn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `cusp_mdn` invocation. `args` excludes the program name.
/// Subcommands: generate, train, evaluate, predict, export-surface, reproduce.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cuspmdn::cli
