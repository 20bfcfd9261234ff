#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hopf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `hopf` tool. `args` excludes the program name.
// Verbs: gen, train, hopf, bench-scaling, neighbor-fraction, nim, compare.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hopf::cli
