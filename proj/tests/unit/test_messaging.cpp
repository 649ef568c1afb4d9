#include <gtest/gtest.h>

#include "agentosi/error.hpp"
#include "agentosi/messaging.hpp"

using namespace agentosi;

namespace {

struct BusFixture : ::testing::Test {
  AgentIdentity a = AgentIdentity::from_seed(101);
  AgentIdentity b = AgentIdentity::from_seed(102);
  MessageBus bus{LatencyModel{5, 10, 0.0}, 1};
  ThreadId thread;

  void SetUp() override {
    bus.register_inbox(a.address());
    bus.register_inbox(b.address());
    thread = bus.open_thread(a.address(), b.address());
  }

  MessageEnvelope env(std::uint64_t nonce, std::int64_t t = 0) {
    return MessageEnvelope::seal(a, b.address(), thread, nonce, t, PayloadType::Text,
                                 Json{{"n", nonce}});
  }
};

}  // namespace

TEST_F(BusFixture, DeliversWithinLatencyBounds) {
  const auto h = bus.send(env(1), 100);
  EXPECT_GE(h.delivery_ms, 105);
  EXPECT_LE(h.delivery_ms, 110);
  EXPECT_TRUE(bus.receive(b.address(), h.delivery_ms - 1).empty());
  const auto got = bus.receive(b.address(), h.delivery_ms);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].payload_json().at("n"), 1);
  EXPECT_TRUE(got[0].signature_valid());
}

TEST_F(BusFixture, ReplayedNonceAudited) {
  bus.send(env(1), 0);
  bus.send(env(1), 0);
  const auto got = bus.receive(b.address(), 1000);
  EXPECT_EQ(got.size(), 1u);
  ASSERT_EQ(bus.audit_log().size(), 1u);
  EXPECT_EQ(bus.audit_log()[0].reason, "replayed_nonce");
}

TEST_F(BusFixture, TamperedEnvelopeRejectedAtSend) {
  auto e = env(1);
  e.payload = R"({"n":2})";
  EXPECT_FALSE(e.signature_valid());
  EXPECT_THROW(bus.send(e, 0), Error);
}

TEST_F(BusFixture, UnknownReceiver) {
  const auto c = AgentIdentity::from_seed(103);
  auto e = MessageEnvelope::seal(a, c.address(), thread, 1, 0, PayloadType::Text, Json::object());
  EXPECT_THROW(bus.send(e, 0), Error);
}

TEST_F(BusFixture, ThreadIdsUnique) {
  std::set<ThreadId> ids{thread};
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(ids.insert(bus.open_thread(a.address(), b.address())).second);
}

TEST_F(BusFixture, EnvelopeJsonRoundTrip) {
  const auto e = env(4, 77);
  const auto back = MessageEnvelope::from_json(e.to_json());
  EXPECT_EQ(canonicalize(back.to_json()), canonicalize(e.to_json()));
  EXPECT_TRUE(back.signature_valid());
}

TEST_F(BusFixture, ListenerSeesEverySend) {
  std::vector<std::int64_t> seen;
  bus.set_delivery_listener([&](const Address& to, std::int64_t at) {
    EXPECT_EQ(to, b.address());
    seen.push_back(at);
  });
  bus.send(env(1), 0);
  bus.send(env(2), 0);
  EXPECT_EQ(seen.size(), 2u);
}

TEST(MessageBusCap, SpacingBoundsRate) {
  const auto a = AgentIdentity::from_seed(1);
  const auto b = AgentIdentity::from_seed(2);
  MessageBus bus(LatencyModel{5, 10, 0.0}, 3, 50.0);
  EXPECT_EQ(bus.min_spacing_ms(), 20);
  bus.register_inbox(a.address());
  bus.register_inbox(b.address());
  const auto t = bus.open_thread(a.address(), b.address());
  std::vector<std::int64_t> at;
  for (std::uint64_t n = 1; n <= 200; ++n) {
    at.push_back(bus.send(MessageEnvelope::seal(a, b.address(), t, n, 0, PayloadType::Text, Json::object()), 0)
                     .delivery_ms);
  }
  std::sort(at.begin(), at.end());
  for (std::size_t i = 1; i < at.size(); ++i) EXPECT_GE(at[i] - at[i - 1], 20);
  std::map<std::int64_t, int> per_second;
  for (auto t2 : at) ++per_second[t2 / 1000];
  for (const auto& [s, n] : per_second) EXPECT_LE(n, 50);
}

TEST(MessageBusDrop, DroppedMessagesAudited) {
  const auto a = AgentIdentity::from_seed(1);
  const auto b = AgentIdentity::from_seed(2);
  MessageBus bus(LatencyModel{5, 10, 1.0}, 3);
  bus.register_inbox(b.address());
  const auto t = bus.open_thread(a.address(), b.address());
  const auto h = bus.send(MessageEnvelope::seal(a, b.address(), t, 1, 0, PayloadType::Text, Json::object()), 0);
  EXPECT_TRUE(h.dropped);
  EXPECT_TRUE(bus.receive(b.address(), 1000).empty());
  EXPECT_EQ(bus.audit_log().at(0).reason, "dropped_in_transit");
}
