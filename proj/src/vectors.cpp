#include "agentosi/vectors.hpp"

#include <algorithm>

#include "agentosi/bytes.hpp"
#include "agentosi/crypto.hpp"
#include "agentosi/error.hpp"

namespace agentosi {

namespace {

std::string hex_of(std::string_view s) { return to_hex(as_bytes(s)); }

Bytes unhex(const Json& v) { return from_hex(v.get<std::string>()); }

std::string sig_hex(const Signature& s) { return to_hex(ByteView(s.bytes.data(), s.bytes.size())); }

const Json& section(const Json& doc, const char* name) {
  static const Json empty = Json::array();
  auto it = doc.find(name);
  return it == doc.end() ? empty : *it;
}

}  // namespace

Json default_vector_inputs() {
  Bytes counting(256);
  for (std::size_t i = 0; i < counting.size(); ++i) counting[i] = static_cast<std::uint8_t>(i);
  Bytes pattern(97);
  for (std::size_t i = 0; i < pattern.size(); ++i) pattern[i] = static_cast<std::uint8_t>(i * 37 + 11);

  Json sha = Json::array();
  for (const auto& in : {hex_of(""), hex_of("abc"),
                         hex_of("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
                         std::string(128, '0'), to_hex(counting)}) {
    sha.push_back(Json{{"input", in}});
  }
  Json canon = Json::array();
  for (const char* text : {
           R"({"b":1,"a":2})",
           R"({})",
           R"({"x":[{"z":0,"y":""}]})",
           R"({"price":250000,"currency":"USDC","nested":{"k2":[3,2,1],"k1":null,"k0":true}})",
           R"({"été":"café","Z":"quote\"slash\\nl\n\ttab\u0001","a":-17,"emoji":"🐱"})",
           R"([1,[2,[3,{"b":false,"a":[]}]]])"}) {
    canon.push_back(Json{{"value", Json::parse(text)}});
  }
  Json ids = Json::array();
  for (std::uint64_t seed : {1, 2, 3, 42}) ids.push_back(Json{{"seed", seed}});
  Json sigs = Json::array();
  for (std::uint64_t seed : {1, 2, 3}) {
    for (const auto& m : {hex_of(""), hex_of("Satoshi Nakamoto"), hex_of(R"({"a":2,"b":1})"),
                          to_hex(pattern)}) {
      sigs.push_back(Json{{"seed", seed}, {"message", m}});
    }
  }
  Json raw = Json::array();
  raw.push_back(Json{{"secret", std::string(63, '0') + "1"}, {"message", hex_of("Satoshi Nakamoto")}});
  return Json{{"sha256", sha},
              {"canonical_json", canon},
              {"identities", ids},
              {"signatures", sigs},
              {"raw_key_signatures", raw}};
}

Json emit_vectors(const Json& inputs) {
  Json out = Json::object();
  Json sha = Json::array();
  for (const auto& c : section(inputs, "sha256")) {
    sha.push_back(Json{{"input", c.at("input")}, {"digest", sha256(unhex(c.at("input"))).hex()}});
  }
  Json canon = Json::array();
  for (const auto& c : section(inputs, "canonical_json")) {
    canon.push_back(Json{{"value", c.at("value")}, {"canonical", hex_of(canonicalize(c.at("value")))}});
  }
  Json ids = Json::array();
  for (const auto& c : section(inputs, "identities")) {
    const auto id = AgentIdentity::from_seed(c.at("seed").get<std::uint64_t>());
    ids.push_back(Json{{"seed", c.at("seed")},
                       {"secret", to_hex(ByteView(id.secret_key().data(), id.secret_key().size()))},
                       {"public_key", id.public_key().hex()},
                       {"address", id.address().hex()}});
  }
  Json sigs = Json::array();
  for (const auto& c : section(inputs, "signatures")) {
    const auto id = AgentIdentity::from_seed(c.at("seed").get<std::uint64_t>());
    sigs.push_back(Json{{"seed", c.at("seed")},
                        {"message", c.at("message")},
                        {"signature", sig_hex(id.sign(unhex(c.at("message"))))}});
  }
  Json raw = Json::array();
  for (const auto& c : section(inputs, "raw_key_signatures")) {
    const auto secret = unhex(c.at("secret"));
    if (secret.size() != 32) throw Error(Errc::InvalidLength, "secret must be 32 bytes");
    std::array<std::uint8_t, 32> key{};
    std::copy(secret.begin(), secret.end(), key.begin());
    const auto id = AgentIdentity::from_secret(key);
    raw.push_back(Json{{"secret", c.at("secret")},
                       {"message", c.at("message")},
                       {"signature", sig_hex(id.sign(unhex(c.at("message"))))}});
  }
  out["sha256"] = sha;
  out["canonical_json"] = canon;
  out["identities"] = ids;
  out["signatures"] = sigs;
  out["raw_key_signatures"] = raw;
  return out;
}

std::vector<std::string> check_vectors(const Json& vectors) {
  std::vector<std::string> bad;
  const Json expected = emit_vectors(vectors);
  for (const char* name : {"sha256", "canonical_json", "identities", "signatures", "raw_key_signatures"}) {
    const auto& got = section(vectors, name);
    const auto& want = expected.at(name);
    for (std::size_t i = 0; i < got.size(); ++i) {
      for (const auto& [key, value] : want[i].items()) {
        if (!got[i].contains(key) || got[i].at(key) != value) {
          bad.push_back(std::string(name) + "[" + std::to_string(i) + "]." + key + ": expected " +
                        value.dump());
        }
      }
    }
  }
  return bad;
}

}  // namespace agentosi
