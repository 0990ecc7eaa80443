#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `seqlab` tool. args[0] is the program name.
// Subcommands: train, tag, eval, convert, gradcheck.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace seqlab
