#include <gtest/gtest.h>

#include "agentosi/content_store.hpp"
#include "agentosi/crypto.hpp"
#include "agentosi/error.hpp"
#include "test_support.hpp"

using namespace agentosi;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST(Cid, FormatAndParse) {
  const auto c = Cid::of(as_bytes("hello"));
  EXPECT_EQ(c.str(), "cid:" + sha256(std::string_view("hello")).hex());
  EXPECT_EQ(Cid::parse(c.str()), c);
  EXPECT_THROW(Cid::parse("sha:00"), Error);
  EXPECT_THROW(Cid::parse("cid:zz"), Error);
}

TEST(UploadModel, LatencyFormula) {
  UploadModel m;
  EXPECT_EQ(m.latency_ms(0), 50);
  EXPECT_EQ(m.latency_ms(1 << 20), 70);
  EXPECT_EQ(m.latency_ms(65'536), 51);
}

TEST(ContentStore, PutGetAvailability) {
  ContentStore store;
  const auto put = store.put(as_bytes("payload"), 1'000);
  EXPECT_EQ(put.completion_ms, 1'050);
  EXPECT_EQ(code_of([&] { store.get(put.cid, 1'049); }), Errc::NotYetAvailable);
  EXPECT_EQ(store.get(put.cid, 1'050), to_bytes("payload"));
  EXPECT_TRUE(store.contains(put.cid));
  EXPECT_EQ(code_of([&] { store.get(Cid::of(as_bytes("x")), 5'000); }), Errc::NotFound);
  EXPECT_EQ(code_of([&] { store.put(ByteView{}, 0); }), Errc::EmptyContent);
}

TEST(ContentStore, IdempotentPut) {
  ContentStore store;
  const auto a = store.put(as_bytes("same"), 100);
  const auto b = store.put(as_bytes("same"), 0);
  EXPECT_EQ(a.cid, b.cid);
  EXPECT_EQ(b.completion_ms, 50);
  EXPECT_EQ(store.size(), 1u);
}

TEST(ContentStore, CorruptionDetected) {
  ContentStore store;
  const auto put = store.put(as_bytes("data"), 0);
  store.corrupt_for_test(put.cid);
  EXPECT_EQ(code_of([&] { store.get(put.cid, 1'000); }), Errc::IntegrityFailure);
}

TEST(ContentStore, PersistsToDirectory) {
  const auto dir = agentosi::testing::scratch_dir("store");
  ContentStore store(UploadModel{}, dir);
  const auto put = store.put(as_bytes("persisted"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / put.cid.digest().hex()));
}
