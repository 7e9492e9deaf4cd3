#include "membrane/errors.hpp"

namespace membrane {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonMonotoneX: return "NonMonotoneX";
    case ErrorCode::NegativeY: return "NegativeY";
    case ErrorCode::DegenerateLength: return "DegenerateLength";
    case ErrorCode::PoleTangentNotPerpendicular: return "PoleTangentNotPerpendicular";
    case ErrorCode::NonvanishingWell: return "NonvanishingWell";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::EpsTooLarge: return "EpsTooLarge";
    case ErrorCode::AssemblyOverlap: return "AssemblyOverlap";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::SingularConstraintSystem: return "SingularConstraintSystem";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace membrane
