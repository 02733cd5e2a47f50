#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bas_sdre::cli {

// Exit codes (sysexits-style where one applies).
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitRolloutFailed = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataError = 65;
inline constexpr int kExitIoError = 74;

/// Environment variable consulted for the output directory when no
/// --output-dir flag is given.
inline constexpr const char* kOutputDirEnv = "BAS_SDRE_OUTPUT_DIR";

/// Entry point shared by the binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bas_sdre::cli
