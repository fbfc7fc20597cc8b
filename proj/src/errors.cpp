#include "dynmis/errors.hpp"

namespace dynmis {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AddExisting: return "AddExisting";
    case ErrorCode::DeleteMissing: return "DeleteMissing";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DistanceOutOfRadius: return "DistanceOutOfRadius";
    case ErrorCode::DegreeSequenceInfeasible: return "DegreeSequenceInfeasible";
    case ErrorCode::IllegalEvent: return "IllegalEvent";
    case ErrorCode::CheckpointMissing: return "CheckpointMissing";
    case ErrorCode::CheckpointCorrupt: return "CheckpointCorrupt";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace dynmis
