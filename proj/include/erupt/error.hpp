#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace erupt
{
enum class ErrorCode
{
  MalformedXml,
  KinematicLoop,
  MissingLimit,
  DanglingReference,
  UnknownGroup,
  DimensionMismatch,
  InvalidShape,
  DuplicateId,
  UnknownId,
  VersionEvicted,
  MissingVelocityLimit,
  OversizeMessage,
  FrameTooLong,
  MalformedJson,
  UnknownType,
  InvalidMessage,
  ProtocolVersion,
  UnknownPlanner,
  UnknownTrajectory,
  Busy,
  Aborted,
  NotReady,
  InvalidArgument,
  Io,
  ShuttingDown,
};

std::string_view error_code_name(ErrorCode code);

/// Exception type used across the library. The code doubles as the wire-level
/// error code string reported to protocol clients.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code)
  {
  }

  ErrorCode code() const noexcept
  {
    return code_;
  }

private:
  ErrorCode code_;
};

}  // namespace erupt
