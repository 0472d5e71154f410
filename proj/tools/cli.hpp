#ifndef OPENGP_TOOLS_CLI_HPP
#define OPENGP_TOOLS_CLI_HPP

#include <iosfwd>

namespace opengp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `opengp` command; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opengp

#endif  // OPENGP_TOOLS_CLI_HPP
