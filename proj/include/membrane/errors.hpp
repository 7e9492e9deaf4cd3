#pragma once

#include <stdexcept>
#include <string>

namespace membrane {

enum class ErrorCode {
  InvalidArgument,
  NonMonotoneX,
  NegativeY,
  DegenerateLength,
  PoleTangentNotPerpendicular,
  NonvanishingWell,
  EmptyResult,
  EpsTooLarge,
  AssemblyOverlap,
  NotSimple,
  SingularConstraintSystem,
  StepRejected,
  MaxStepsExceeded,
  UnknownScenario,
  IncompatibleGrids,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (CLI, python) can map it to a stable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace membrane
