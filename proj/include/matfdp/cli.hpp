#ifndef MATFDP_CLI_HPP
#define MATFDP_CLI_HPP

#include <iosfwd>

namespace matfdp {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBadData = 3;
inline constexpr int kExitUnwritable = 4;

// Entry point behind the matfdp executable. Subcommands: simulate, analyze,
// gen-synthetic. Messages go to out / err; result files go under --out.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace matfdp

#endif  // MATFDP_CLI_HPP
