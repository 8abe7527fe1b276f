#include "erupt/error.hpp"

namespace erupt
{
std::string_view error_code_name(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::MalformedXml:
      return "MalformedXml";
    case ErrorCode::KinematicLoop:
      return "KinematicLoop";
    case ErrorCode::MissingLimit:
      return "MissingLimit";
    case ErrorCode::DanglingReference:
      return "DanglingReference";
    case ErrorCode::UnknownGroup:
      return "UnknownGroup";
    case ErrorCode::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::InvalidShape:
      return "InvalidShape";
    case ErrorCode::DuplicateId:
      return "DuplicateId";
    case ErrorCode::UnknownId:
      return "UnknownId";
    case ErrorCode::VersionEvicted:
      return "VersionEvicted";
    case ErrorCode::MissingVelocityLimit:
      return "MissingVelocityLimit";
    case ErrorCode::OversizeMessage:
      return "OversizeMessage";
    case ErrorCode::FrameTooLong:
      return "FrameTooLong";
    case ErrorCode::MalformedJson:
      return "MalformedJson";
    case ErrorCode::UnknownType:
      return "UnknownType";
    case ErrorCode::InvalidMessage:
      return "InvalidMessage";
    case ErrorCode::ProtocolVersion:
      return "ProtocolVersion";
    case ErrorCode::UnknownPlanner:
      return "UnknownPlanner";
    case ErrorCode::UnknownTrajectory:
      return "UnknownTrajectory";
    case ErrorCode::Busy:
      return "Busy";
    case ErrorCode::Aborted:
      return "Aborted";
    case ErrorCode::NotReady:
      return "NotReady";
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
    case ErrorCode::Io:
      return "Io";
    case ErrorCode::ShuttingDown:
      return "ShuttingDown";
  }
  return "Unknown";
}

}  // namespace erupt
