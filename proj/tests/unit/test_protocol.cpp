#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "erupt/messages.hpp"
#include "support/messages_corpus.hpp"
#include "support/scenes.hpp"

using namespace erupt;
using namespace erupt::protocol;
using namespace erupt::test;

namespace
{
std::string bigEndian(std::uint32_t n)
{
  std::string out(4, '\0');
  out[0] = static_cast<char>((n >> 24) & 0xff);
  out[1] = static_cast<char>((n >> 16) & 0xff);
  out[2] = static_cast<char>((n >> 8) & 0xff);
  out[3] = static_cast<char>(n & 0xff);
  return out;
}

}  // namespace

TEST(Protocol, HelloFrameIsByteExact)
{
  const std::string text = R"({"type":"hello","body":{"client_name":"ui","protocol_version":1}})";
  ASSERT_EQ(text.size(), 65u);
  const std::string frame = encodeFrame(makeHello("ui"));
  EXPECT_EQ(frame.substr(0, 4), std::string("\x00\x00\x00\x41", 4));
  EXPECT_EQ(frame.substr(4), text);
}

TEST(Protocol, EnvelopeFieldOrder)
{
  Message m;
  m.type = "snapshot_request";
  m.id = 3;
  EXPECT_EQ(serialize(m), R"({"type":"snapshot_request","id":3,"body":{}})");
}

TEST(Protocol, EmptyBodyRoundTrips)
{
  Message m;
  m.type = "planners_request";
  m.id = 1;
  const auto decoded = decodeAll(encodeFrame(m));
  ASSERT_EQ(decoded.size(), 1u);
  EXPECT_EQ(std::get<Message>(decoded[0]), m);
  // A missing body decodes to the same empty object.
  const auto bare = decodeAll(encodeFramePayload(R"({"type":"planners_request","id":1})"));
  EXPECT_EQ(std::get<Message>(bare[0]), m);
}

TEST(Protocol, OversizePayloadRejected)
{
  Message m;
  m.type = "warning";
  m.body = Json{ { "code", "x" }, { "human_text", std::string(17u * 1024u * 1024u, 'a') } };
  try
  {
    encodeFrame(m);
    FAIL() << "expected OversizeMessage";
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.code(), ErrorCode::OversizeMessage);
  }
}

TEST(Protocol, AtLimitPayloadAccepted)
{
  Message m;
  m.type = "warning";
  const std::string shell = serialize(Message{ "warning", std::nullopt, Json{ { "code", "" } } });
  m.body = Json{ { "code", std::string(kMaxPayload - shell.size(), 'a') } };
  const std::string frame = encodeFrame(m);
  EXPECT_EQ(frame.size(), kMaxPayload + 4);
  const auto decoded = decodeAll(frame);
  ASSERT_EQ(decoded.size(), 1u);
  EXPECT_EQ(std::get<Message>(decoded[0]), m);
}

TEST(Protocol, TwoFramesInOneRead)
{
  const std::string bytes = encodeFrame(makeHello("a")) + encodeFrame(makePlannersRequest(4));
  FrameDecoder decoder;
  decoder.feed(bytes);
  const auto msgs = messagesOf(drain(decoder));
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].type, "hello");
  EXPECT_EQ(msgs[1].type, "planners_request");
  EXPECT_EQ(msgs[1].id, 4);
  EXPECT_EQ(decoder.buffered(), 0u);
}

TEST(Protocol, OneByteAtATime)
{
  const std::string bytes = encodeFrame(makeHello("ui"));
  FrameDecoder decoder;
  std::vector<Decoded> out;
  for (std::size_t i = 0; i < bytes.size(); ++i)
  {
    decoder.feed(bytes.substr(i, 1));
    auto got = drain(decoder);
    if (i + 1 < bytes.size())
    {
      EXPECT_TRUE(got.empty()) << "early message at byte " << i;
    }
    out.insert(out.end(), got.begin(), got.end());
  }
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(std::get<Message>(out[0]), makeHello("ui"));
}

TEST(Protocol, RandomSplitsAreInvariant)
{
  std::string stream;
  for (const Message& m : everyType())
    stream += encodeFrame(m);
  const auto reference = decodeAll(stream);
  ASSERT_EQ(messagesOf(reference), everyType());

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10000; ++trial)
  {
    std::uniform_int_distribution<std::size_t> cut(0, stream.size());
    std::vector<std::size_t> cuts(1 + trial % 5);
    for (auto& c : cuts)
      c = cut(rng);
    std::sort(cuts.begin(), cuts.end());
    FrameDecoder decoder;
    std::vector<Decoded> out;
    std::size_t prev = 0;
    for (std::size_t c : cuts)
    {
      decoder.feed(std::string_view(stream).substr(prev, c - prev));
      auto got = drain(decoder);
      out.insert(out.end(), got.begin(), got.end());
      prev = c;
    }
    decoder.feed(std::string_view(stream).substr(prev));
    auto got = drain(decoder);
    out.insert(out.end(), got.begin(), got.end());
    ASSERT_EQ(messagesOf(out), messagesOf(reference)) << "trial " << trial;
  }
}

TEST(Protocol, EveryTypeRoundTrips)
{
  std::set<std::string> seen;
  for (const Message& m : everyType())
  {
    const auto decoded = decodeAll(encodeFrame(m));
    ASSERT_EQ(decoded.size(), 1u) << m.type;
    ASSERT_TRUE(std::holds_alternative<Message>(decoded[0])) << m.type;
    EXPECT_EQ(std::get<Message>(decoded[0]), m) << m.type;
    // The WebSocket path carries the same text without the prefix.
    EXPECT_EQ(std::get<Message>(decodePayload(serialize(m))), m) << m.type;
    seen.insert(m.type);
  }
  for (std::string_view t : messageTypes())
    EXPECT_TRUE(seen.count(std::string(t))) << "no round-trip case for " << t;
}

TEST(Protocol, TypedBodiesRoundTrip)
{
  for (const Message& m : everyType())
  {
    const Message back = std::get<Message>(decodePayload(serialize(m)));
    if (m.type == type::kSceneOp)
    {
      const SceneOpRequest op = decodeSceneOpRequest(back.body);
      EXPECT_EQ(makeSceneOp(op, m.id), m);
    }
    else if (m.type == type::kExecuteRequest)
    {
      EXPECT_EQ(makeExecuteRequest(decodeExecuteRequest(back.body), *m.id), m);
    }
    else if (m.type == type::kExecuteStatus)
    {
      EXPECT_EQ(makeExecuteStatus(decodeExecuteStatus(back.body), m.id), m);
    }
    else if (m.type == type::kIkRequest)
    {
      EXPECT_EQ(makeIkRequest(decodeIkRequest(back.body), *m.id), m);
    }
    else if (m.type == type::kIkResponse)
    {
      EXPECT_EQ(makeIkResponse(decodeIkResponse(back.body), *m.id), m);
    }
    else if (m.type == type::kPlanRequest)
    {
      EXPECT_EQ(makePlanRequest(json::decodePlanRequest(back.body), *m.id), m);
    }
    else if (m.type == type::kSceneDiff)
    {
      EXPECT_EQ(makeSceneDiff(json::decodeSceneDiff(back.body), m.id), m);
    }
    else if (m.type == type::kSnapshot)
    {
      EXPECT_EQ(makeSnapshot(json::decodeSnapshot(back.body), m.id), m);
    }
    else if (m.type == type::kRobotState)
    {
      const auto rs = decodeRobotState(back.body);
      EXPECT_EQ(makeRobotState(rs.state, rs.version), m);
    }
    else if (m.type == type::kMirrorSet)
    {
      EXPECT_EQ(makeMirrorSet(decodeMirrorSet(back.body), m.id), m);
    }
  }
}

TEST(Protocol, TooLongFrameIsFatal)
{
  FrameDecoder decoder;
  decoder.feed(bigEndian(static_cast<std::uint32_t>(kMaxPayload + 1)));
  auto got = drain(decoder);
  ASSERT_EQ(got.size(), 1u);
  const auto& err = std::get<DecodeError>(got[0]);
  EXPECT_EQ(err.code, ErrorCode::FrameTooLong);
  EXPECT_TRUE(err.fatal);
  EXPECT_TRUE(decoder.failed());
  decoder.feed(encodeFrame(makeHello("ui")));
  EXPECT_TRUE(drain(decoder).empty());
}

TEST(Protocol, MalformedJsonIsFatal)
{
  FrameDecoder decoder;
  decoder.feed(encodeFramePayload("{\"type\": \"hello\", ") + encodeFrame(makeHello("ui")));
  auto got = drain(decoder);
  ASSERT_EQ(got.size(), 1u);
  const auto& err = std::get<DecodeError>(got[0]);
  EXPECT_EQ(err.code, ErrorCode::MalformedJson);
  EXPECT_TRUE(err.fatal);
}

TEST(Protocol, UnknownTypeIsNotFatal)
{
  FrameDecoder decoder;
  decoder.feed(encodeFramePayload(R"({"type":"teleport","id":9,"body":{}})") + encodeFrame(makeHello("ui")));
  auto got = drain(decoder);
  ASSERT_EQ(got.size(), 2u);
  const auto& err = std::get<DecodeError>(got[0]);
  EXPECT_EQ(err.code, ErrorCode::UnknownType);
  EXPECT_FALSE(err.fatal);
  EXPECT_EQ(err.id, 9);
  EXPECT_EQ(std::get<Message>(got[1]).type, "hello");
  EXPECT_FALSE(decoder.failed());
}

TEST(Protocol, BadEnvelopeIsNotFatal)
{
  for (const char* text : { R"({"id":1,"body":{}})", R"({"type":3})", R"([1,2])", R"({"type":"hello","id":"x"})",
                            R"({"type":"hello","body":[]})" })
  {
    const Decoded d = decodePayload(text);
    ASSERT_TRUE(std::holds_alternative<DecodeError>(d)) << text;
    EXPECT_EQ(std::get<DecodeError>(d).code, ErrorCode::InvalidMessage) << text;
    EXPECT_FALSE(std::get<DecodeError>(d).fatal) << text;
  }
}

TEST(Protocol, InvalidUtf8IsMalformed)
{
  const Decoded d = decodePayload(std::string("{\"type\":\"hello\",\"body\":{\"client_name\":\"\xff\"}}"));
  ASSERT_TRUE(std::holds_alternative<DecodeError>(d));
  EXPECT_EQ(std::get<DecodeError>(d).code, ErrorCode::MalformedJson);
}

TEST(Protocol, BodySchemaErrors)
{
  auto expectInvalid = [](auto&& fn) {
    try
    {
      fn();
      ADD_FAILURE() << "expected InvalidMessage";
    }
    catch (const Error& e)
    {
      EXPECT_EQ(e.code(), ErrorCode::InvalidMessage);
    }
  };
  expectInvalid([] { decodeSceneOpRequest(Json{ { "op", "explode" } }); });
  expectInvalid([] { decodeSceneOpRequest(Json{ { "op", "remove" } }); });
  expectInvalid([] { decodeExecuteRequest(Json::object()); });
  expectInvalid([] { decodeMirrorSet(Json{ { "enabled", "yes" } }); });
  expectInvalid([] { decodeHello(Json{ { "client_name", "ui" } }); });
  expectInvalid([] { decodeSnapshotSince(Json{ { "since", -1 } }); });
}
