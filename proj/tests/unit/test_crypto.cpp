#include <gtest/gtest.h>

#include "agentosi/crypto.hpp"
#include "agentosi/error.hpp"
#include "agentosi/vectors.hpp"
#include "test_support.hpp"

using namespace agentosi;

namespace {

std::array<std::uint8_t, 32> secret_of(const std::string& hex) {
  std::array<std::uint8_t, 32> out{};
  const auto b = from_hex(hex);
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace

TEST(Crypto, Sha256MatchesOracle) {
  for (const auto& c : agentosi::testing::load_fixture("crypto_vectors.json").at("sha256")) {
    EXPECT_EQ(sha256(from_hex(c.at("input").get<std::string>())).hex(), c.at("digest"));
  }
}

TEST(Crypto, IdentitiesMatchOracle) {
  for (const auto& c : agentosi::testing::load_fixture("crypto_vectors.json").at("identities")) {
    const auto id = AgentIdentity::from_seed(c.at("seed").get<std::uint64_t>());
    EXPECT_EQ(to_hex(ByteView(id.secret_key().data(), 32)), c.at("secret"));
    EXPECT_EQ(id.public_key().hex(), c.at("public_key"));
    EXPECT_EQ(id.address().hex(), c.at("address"));
    EXPECT_EQ(derive_address(id.public_key()), id.address());
  }
}

TEST(Crypto, SignaturesMatchOracle) {
  for (const auto& c : agentosi::testing::load_fixture("crypto_vectors.json").at("signatures")) {
    const auto id = AgentIdentity::from_seed(c.at("seed").get<std::uint64_t>());
    const auto msg = from_hex(c.at("message").get<std::string>());
    const auto sig = id.sign(msg);
    EXPECT_EQ(to_hex(ByteView(sig.bytes.data(), sig.bytes.size())), c.at("signature"));
    EXPECT_TRUE(verify(id.public_key(), msg, sig));
    EXPECT_TRUE(verify_signer(msg, sig));
  }
}

TEST(Crypto, KnownRfc6979Vector) {
  const auto doc = agentosi::testing::load_fixture("crypto_vectors.json");
  const auto& c = doc.at("raw_key_signatures").at(0);
  const auto id = AgentIdentity::from_secret(secret_of(c.at("secret")));
  const auto sig = id.sign(from_hex(c.at("message").get<std::string>()));
  EXPECT_EQ(to_hex(ByteView(sig.bytes.data(), sig.bytes.size())), c.at("signature"));
}

TEST(Crypto, FixtureCheckPasses) {
  EXPECT_TRUE(check_vectors(agentosi::testing::load_fixture("crypto_vectors.json")).empty());
}

TEST(Crypto, CheckDetectsAlteredVector) {
  auto v = agentosi::testing::load_fixture("crypto_vectors.json");
  v["identities"][0]["address"] = std::string(40, '0');
  EXPECT_EQ(check_vectors(v).size(), 1u);
}

TEST(Crypto, RejectsWrongMessageAndKey) {
  const auto a = AgentIdentity::from_seed(7);
  const auto b = AgentIdentity::from_seed(8);
  const auto sig = a.sign(std::string_view("hello"));
  EXPECT_FALSE(verify(a.public_key(), as_bytes("hellp"), sig));
  EXPECT_FALSE(verify(b.public_key(), as_bytes("hello"), sig));
  auto forged = sig;
  forged.signer = b.address();
  EXPECT_FALSE(verify_signer(as_bytes("hello"), forged));
}

TEST(Crypto, RecoverPublicKey) {
  const auto a = AgentIdentity::from_seed(9);
  const auto sig = a.sign(std::string_view("payload"));
  const auto pk = recover_public_key(as_bytes("payload"), sig);
  ASSERT_TRUE(pk.has_value());
  EXPECT_EQ(*pk, a.public_key());
}

TEST(Crypto, InvalidSecretRejected) {
  std::array<std::uint8_t, 32> zero{};
  EXPECT_THROW(AgentIdentity::from_secret(zero), Error);
  std::array<std::uint8_t, 32> big;
  big.fill(0xff);
  EXPECT_THROW(AgentIdentity::from_secret(big), Error);
}

TEST(Crypto, InvalidPublicKeyRejected) {
  PublicKey bad;
  bad.raw()[0] = 0x04;
  EXPECT_THROW(derive_address(bad), Error);
}
