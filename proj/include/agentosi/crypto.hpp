#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "agentosi/bytes.hpp"
#include "agentosi/canonical_json.hpp"

namespace agentosi {

Digest32 sha256(ByteView data);
inline Digest32 sha256(std::string_view data) { return sha256(as_bytes(data)); }

// Compact recoverable ECDSA signature over secp256k1: r || s || recovery id.
// `signer` is the address the signature claims; verification recovers the
// public key and checks it against that address.
struct Signature {
  std::array<std::uint8_t, 65> bytes{};
  Address signer;

  friend bool operator==(const Signature&, const Signature&) = default;

  Json to_json() const;
  static Signature from_json(const Json& j);
};

// last 20 bytes of sha256(uncompressed public key). Throws
// Errc::InvalidPublicKey if the encoding is not a point on the curve.
Address derive_address(const PublicKey& public_key);

class AgentIdentity {
 public:
  // Throws Errc::InvalidSecretKey for zero or out-of-range scalars.
  static AgentIdentity from_secret(const std::array<std::uint8_t, 32>& secret);
  // Deterministic key from a 64-bit seed; see README for the derivation.
  static AgentIdentity from_seed(std::uint64_t seed);

  const std::array<std::uint8_t, 32>& secret_key() const { return secret_; }
  const PublicKey& public_key() const { return public_key_; }
  const Address& address() const { return address_; }

  // RFC 6979 deterministic, low-s normalized signature over sha256(message).
  Signature sign(ByteView message) const;
  Signature sign(std::string_view message) const { return sign(as_bytes(message)); }

 private:
  AgentIdentity() = default;

  std::array<std::uint8_t, 32> secret_{};
  PublicKey public_key_;
  Address address_;
};

bool verify(const PublicKey& public_key, ByteView message, const Signature& signature);

// Recovers the signing key and checks that it hashes to signature.signer.
bool verify_signer(ByteView message, const Signature& signature);
inline bool verify_signer(std::string_view message, const Signature& signature) {
  return verify_signer(as_bytes(message), signature);
}

std::optional<PublicKey> recover_public_key(ByteView message, const Signature& signature);

}  // namespace agentosi
