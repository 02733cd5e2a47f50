#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bas_sdre {

enum class ErrorCode {
  kNoStabilizingSolution,
  kIllConditioned,
  kSingularOperator,
  kMissingDirectDrift,
  kInvalidParams,
  kUnsafeState,
  kSegmentUnsafe,
  kQuadratureNotConverged,
  kOriginUnsafe,
  kStepOutOfDomain,
  kConfigError,
  kIoError,
  kEmptyTrajectory,
  kDataFormat,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the simulator, the CLI) can map it onto a status or exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bas_sdre
