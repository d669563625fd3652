#ifndef EES_CLI_HPP
#define EES_CLI_HPP

#include <ostream>

namespace ees {

/// Exit codes of the command line tool.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failed = 1; ///< validation findings or SLO violations
inline constexpr int exit_input = 2;  ///< unreadable or invalid input

/// Entry point of the `ees` tool; writes to the given streams instead of stdout/stderr.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ees

#endif // EES_CLI_HPP
