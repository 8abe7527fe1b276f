#include "erupt/protocol.hpp"

#include <algorithm>

namespace erupt::protocol
{
const std::vector<std::string_view>& messageTypes()
{
  static const std::vector<std::string_view> types{
    type::kHello,           type::kSnapshotRequest, type::kSnapshot,      type::kSceneOp,
    type::kSceneDiff,       type::kRobotState,      type::kPlannersRequest, type::kPlanners,
    type::kPlanRequest,     type::kPlanResponse,    type::kExecuteRequest, type::kExecuteStatus,
    type::kExecuteStop,     type::kMirrorSet,       type::kIkRequest,     type::kIkResponse,
    type::kWarning,         type::kError,
  };
  return types;
}

bool isKnownType(std::string_view t)
{
  const auto& types = messageTypes();
  return std::find(types.begin(), types.end(), t) != types.end();
}

std::string serialize(const Message& message)
{
  Json j;
  j["type"] = message.type;
  if (message.id)
    j["id"] = *message.id;
  j["body"] = message.body.is_null() ? Json::object() : message.body;
  return j.dump();
}

Message parseMessage(std::string_view text)
{
  Json j;
  try
  {
    j = Json::parse(text);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorCode::MalformedJson, std::string("payload is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw Error(ErrorCode::InvalidMessage, "message must be a JSON object");
  Message m;
  auto t = j.find("type");
  if (t == j.end() || !t->is_string())
    throw Error(ErrorCode::InvalidMessage, "message needs a string 'type'");
  m.type = t->get<std::string>();
  if (auto id = j.find("id"); id != j.end() && !id->is_null())
  {
    if (!id->is_number_integer())
      throw Error(ErrorCode::InvalidMessage, "'id' must be an integer");
    m.id = id->get<std::int64_t>();
  }
  if (auto body = j.find("body"); body != j.end() && !body->is_null())
  {
    if (!body->is_object())
      throw Error(ErrorCode::InvalidMessage, "'body' must be an object");
    m.body = *body;
  }
  return m;
}

std::string encodeFramePayload(std::string_view payload)
{
  if (payload.size() > kMaxPayload)
    throw Error(ErrorCode::OversizeMessage, "payload of " + std::to_string(payload.size()) + " bytes exceeds the " +
                                                std::to_string(kMaxPayload) + " byte limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(payload);
  return out;
}

std::string encodeFrame(const Message& message)
{
  return encodeFramePayload(serialize(message));
}

namespace
{
// Best effort: pull an integer "id" out of a payload that failed later checks.
std::optional<std::int64_t> salvageId(const Json& j)
{
  if (j.is_object())
    if (auto id = j.find("id"); id != j.end() && id->is_number_integer())
      return id->get<std::int64_t>();
  return std::nullopt;
}
}  // namespace

Decoded decodePayload(std::string_view payload)
{
  Json j;
  try
  {
    j = Json::parse(payload);
  }
  catch (const nlohmann::json::exception& e)
  {
    return DecodeError{ ErrorCode::MalformedJson, std::string("payload is not valid JSON: ") + e.what(), std::nullopt,
                        true };
  }
  try
  {
    Message m = parseMessage(payload);
    if (!isKnownType(m.type))
      return DecodeError{ ErrorCode::UnknownType, "unknown message type '" + m.type + "'", m.id, false };
    return m;
  }
  catch (const Error& e)
  {
    return DecodeError{ e.code(), e.what(), salvageId(j), false };
  }
}

void FrameDecoder::feed(std::string_view bytes)
{
  if (failed_)
    return;
  // Compact once the consumed prefix dominates.
  if (offset_ > 0 && offset_ >= buffer_.size() / 2)
  {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<Decoded> FrameDecoder::next()
{
  if (failed_ || buffered() < 4)
    return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
  const std::uint32_t n = (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
                          std::uint32_t(p[3]);
  if (n > kMaxPayload)
  {
    failed_ = true;
    return DecodeError{ ErrorCode::FrameTooLong,
                        "frame length " + std::to_string(n) + " exceeds " + std::to_string(kMaxPayload),
                        std::nullopt, true };
  }
  if (buffered() < 4 + static_cast<std::size_t>(n))
    return std::nullopt;
  std::string_view payload(buffer_.data() + offset_ + 4, n);
  offset_ += 4 + n;
  Decoded d = decodePayload(payload);
  if (auto* err = std::get_if<DecodeError>(&d); err && err->fatal)
    failed_ = true;
  return d;
}

std::vector<Decoded> decodeAll(std::string_view bytes)
{
  FrameDecoder decoder;
  decoder.feed(bytes);
  std::vector<Decoded> out;
  while (auto d = decoder.next())
    out.push_back(std::move(*d));
  return out;
}

}  // namespace erupt::protocol
