#include <gtest/gtest.h>

#include <cmath>

#include "agentosi/amount.hpp"
#include "agentosi/bytes.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/error.hpp"
#include "agentosi/rng.hpp"
#include "test_support.hpp"

using namespace agentosi;

TEST(Bytes, HexRoundTrip) {
  const Bytes b{0x00, 0x01, 0xab, 0xff};
  EXPECT_EQ(to_hex(b), "0001abff");
  EXPECT_EQ(from_hex("0001ABff"), b);
  EXPECT_THROW(from_hex("abc"), Error);
  EXPECT_THROW(from_hex("zz"), Error);
}

TEST(Bytes, FixedLengthEnforced) {
  EXPECT_THROW(Digest32::from_hex("00"), Error);
  EXPECT_TRUE(Address().is_zero());
  EXPECT_EQ(Address::from_hex(std::string(40, 'a')).hex(), std::string(40, 'a'));
}

TEST(CanonicalJson, MatchesOracle) {
  for (const auto& c : agentosi::testing::load_fixture("crypto_vectors.json").at("canonical_json")) {
    EXPECT_EQ(to_hex(as_bytes(canonicalize(c.at("value")))), c.at("canonical"));
  }
}

TEST(CanonicalJson, KeyOrderIndependent) {
  EXPECT_EQ(canonicalize(Json::parse(R"({"b":1,"a":{"y":2,"x":3}})")),
            canonicalize(Json::parse(R"({"a":{"x":3,"y":2},"b":1})")));
  EXPECT_EQ(canonicalize(Json::parse(R"({"b":1,"a":2})")), R"({"a":2,"b":1})");
}

TEST(CanonicalJson, RejectsNonFinite) {
  EXPECT_THROW(canonicalize(Json(std::nan(""))), Error);
  EXPECT_THROW(canonicalize(Json(INFINITY)), Error);
}

TEST(CanonicalJson, StrictParse) {
  EXPECT_THROW(parse_json("{"), Error);
  EXPECT_EQ(parse_json(R"({"a":1})").at("a"), 1);
}

TEST(CanonicalJson, RequireAccessors) {
  const Json j{{"s", "x"}, {"i", -3}, {"u", 5}};
  EXPECT_EQ(require_string(j, "s"), "x");
  EXPECT_EQ(require_int(j, "i"), -3);
  EXPECT_EQ(require_uint(j, "u"), 5u);
  EXPECT_THROW(require(j, "missing"), Error);
  EXPECT_THROW(require_string(j, "i"), Error);
}

TEST(Amount, ParseAndFormat) {
  EXPECT_EQ(Amount::parse("0.25").micros(), 250'000);
  EXPECT_EQ(Amount::parse("10").micros(), 10'000'000);
  EXPECT_EQ(Amount::parse("1.000001").micros(), 1'000'001);
  EXPECT_EQ(Amount::from_micros(250'000).to_string(), "0.250000");
  EXPECT_THROW(Amount::parse("0.0000001"), Error);
  EXPECT_THROW(Amount::parse("abc"), Error);
}

TEST(Rng, DeterministicAndBounded) {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.uniform_int(3, 9);
    EXPECT_EQ(x, b.uniform_int(3, 9));
    EXPECT_GE(x, 3);
    EXPECT_LE(x, 9);
  }
}
