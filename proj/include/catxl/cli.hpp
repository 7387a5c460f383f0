#ifndef CATXL_CLI_HPP
#define CATXL_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace catxl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line (without the program name). Machine-readable results
// go to `out`, progress and diagnostics to `err`.
int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Expands `--config FILE`: every key of the JSON object becomes a flag
// (underscores turn into dashes) unless that flag is already on the command
// line. Lists become comma-separated values; true booleans become bare flags.
std::vector<std::string> expand_config(std::vector<std::string> args);

}  // namespace catxl::cli

#endif  // CATXL_CLI_HPP
