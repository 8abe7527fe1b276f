#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "erupt/error.hpp"

namespace erupt::protocol
{
using Json = nlohmann::ordered_json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayload = 16u * 1024u * 1024u;
inline constexpr std::uint16_t kDefaultTcpPort = 7462;
inline constexpr std::uint16_t kDefaultWsPort = 7463;

namespace type
{
inline constexpr std::string_view kHello = "hello";
inline constexpr std::string_view kSnapshotRequest = "snapshot_request";
inline constexpr std::string_view kSnapshot = "snapshot";
inline constexpr std::string_view kSceneOp = "scene_op";
inline constexpr std::string_view kSceneDiff = "scene_diff";
inline constexpr std::string_view kRobotState = "robot_state";
inline constexpr std::string_view kPlannersRequest = "planners_request";
inline constexpr std::string_view kPlanners = "planners";
inline constexpr std::string_view kPlanRequest = "plan_request";
inline constexpr std::string_view kPlanResponse = "plan_response";
inline constexpr std::string_view kExecuteRequest = "execute_request";
inline constexpr std::string_view kExecuteStatus = "execute_status";
inline constexpr std::string_view kExecuteStop = "execute_stop";
inline constexpr std::string_view kMirrorSet = "mirror_set";
inline constexpr std::string_view kIkRequest = "ik_request";
inline constexpr std::string_view kIkResponse = "ik_response";
inline constexpr std::string_view kWarning = "warning";
inline constexpr std::string_view kError = "error";
}  // namespace type

/// The closed set of message types.
const std::vector<std::string_view>& messageTypes();
bool isKnownType(std::string_view type);

struct Message
{
  std::string type;
  std::optional<std::int64_t> id;
  Json body = Json::object();

  bool operator==(const Message& other) const = default;
};

/// Canonical JSON text: {"type", "id"?, "body"} in that order, compact.
std::string serialize(const Message& message);
/// Parses one JSON document into a message. Throws Error(MalformedJson) for
/// invalid JSON and Error(InvalidMessage) for a bad envelope. Unknown types
/// are returned as-is; the caller decides.
Message parseMessage(std::string_view text);

/// 4-byte big-endian length + payload. Throws Error(OversizeMessage).
std::string encodeFrame(const Message& message);
std::string encodeFramePayload(std::string_view payload);

/// One decoded item: a message, or a problem with one frame.
struct DecodeError
{
  ErrorCode code;
  std::string text;
  /// Request id when the bad frame carried one.
  std::optional<std::int64_t> id;
  /// The stream cannot be resynchronized; close the connection.
  bool fatal = false;
};

using Decoded = std::variant<Message, DecodeError>;

/// Incremental frame decoder. Bytes may arrive split anywhere.
class FrameDecoder
{
public:
  void feed(std::string_view bytes);
  /// Next complete item, if any. After a fatal error nothing more is produced.
  std::optional<Decoded> next();
  bool failed() const
  {
    return failed_;
  }
  std::size_t buffered() const
  {
    return buffer_.size() - offset_;
  }

private:
  std::string buffer_;
  std::size_t offset_ = 0;
  bool failed_ = false;
};

/// Decodes a whole byte string (for tests and tools).
std::vector<Decoded> decodeAll(std::string_view bytes);

/// Classifies a WebSocket text frame the same way FrameDecoder classifies a
/// payload.
Decoded decodePayload(std::string_view payload);

}  // namespace erupt::protocol
