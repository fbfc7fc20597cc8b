#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dynmis {

enum class ErrorCode {
  AddExisting,
  DeleteMissing,
  SelfLoop,
  NodeOutOfRange,
  ParseError,
  InvalidArgument,
  DimensionMismatch,
  NonFiniteValue,
  DistanceOutOfRadius,
  DegreeSequenceInfeasible,
  IllegalEvent,
  CheckpointMissing,
  CheckpointCorrupt,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dynmis
