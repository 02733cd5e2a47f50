#include "bas_sdre/error.hpp"

namespace bas_sdre {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorCode::kIllConditioned: return "IllConditioned";
    case ErrorCode::kSingularOperator: return "SingularOperator";
    case ErrorCode::kMissingDirectDrift: return "MissingDirectDrift";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kUnsafeState: return "UnsafeState";
    case ErrorCode::kSegmentUnsafe: return "SegmentUnsafe";
    case ErrorCode::kQuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::kOriginUnsafe: return "OriginUnsafe";
    case ErrorCode::kStepOutOfDomain: return "StepOutOfDomain";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::kDataFormat: return "DataFormatError";
  }
  return "Unknown";
}

}  // namespace bas_sdre
