#include "agentosi/crypto.hpp"

#include <openssl/sha.h>
#include <secp256k1.h>
#include <secp256k1_recovery.h>

#include <cstring>

namespace agentosi {

namespace {

constexpr std::string_view kIdentityTag = "agentosi/identity/v1";

const secp256k1_context* context() {
  // Sign/verify/recover are read-only on the context after creation, so a
  // single process-wide instance is shared by all threads.
  static secp256k1_context* ctx = secp256k1_context_create(SECP256K1_CONTEXT_NONE);
  return ctx;
}

std::optional<secp256k1_pubkey> parse_pubkey(const PublicKey& public_key) {
  secp256k1_pubkey pk;
  if (public_key.raw()[0] != 0x04 ||
      !secp256k1_ec_pubkey_parse(context(), &pk, public_key.data(), public_key.size())) {
    return std::nullopt;
  }
  return pk;
}

PublicKey serialize_pubkey(const secp256k1_pubkey& pk) {
  PublicKey out;
  std::size_t len = out.size();
  secp256k1_ec_pubkey_serialize(context(), out.data(), &len, &pk, SECP256K1_EC_UNCOMPRESSED);
  return out;
}

Address address_of_valid_key(const PublicKey& public_key) {
  Digest32 h = sha256(public_key.view());
  Address out;
  std::memcpy(out.data(), h.data() + 12, 20);
  return out;
}

std::optional<secp256k1_ecdsa_recoverable_signature> parse_recoverable(const Signature& sig) {
  int recid = sig.bytes[64];
  if (recid < 0 || recid > 3) return std::nullopt;
  secp256k1_ecdsa_recoverable_signature rs;
  if (!secp256k1_ecdsa_recoverable_signature_parse_compact(context(), &rs, sig.bytes.data(),
                                                           recid)) {
    return std::nullopt;
  }
  return rs;
}

}  // namespace

Digest32 sha256(ByteView data) {
  Digest32 out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Json Signature::to_json() const {
  return Json{{"bytes", to_hex({bytes.data(), bytes.size()})}, {"signer", signer.hex()}};
}

Signature Signature::from_json(const Json& j) {
  Signature s;
  Bytes raw;
  try {
    raw = from_hex(require_string(j, "bytes"));
  } catch (const Error& e) {
    throw Error(Errc::MalformedObject, std::string("signature bytes: ") + e.what());
  }
  if (raw.size() != s.bytes.size()) {
    throw Error(Errc::MalformedObject, "signature must be 65 bytes");
  }
  std::memcpy(s.bytes.data(), raw.data(), raw.size());
  s.signer = require_fixed<Address>(j, "signer");
  return s;
}

Address derive_address(const PublicKey& public_key) {
  if (!parse_pubkey(public_key)) {
    throw Error(Errc::InvalidPublicKey, "not an uncompressed secp256k1 point");
  }
  return address_of_valid_key(public_key);
}

AgentIdentity AgentIdentity::from_secret(const std::array<std::uint8_t, 32>& secret) {
  if (!secp256k1_ec_seckey_verify(context(), secret.data())) {
    throw Error(Errc::InvalidSecretKey, "secret key is zero or not below the group order");
  }
  AgentIdentity id;
  id.secret_ = secret;
  secp256k1_pubkey pk;
  if (!secp256k1_ec_pubkey_create(context(), &pk, secret.data())) {
    throw Error(Errc::InvalidSecretKey, "public key derivation failed");
  }
  id.public_key_ = serialize_pubkey(pk);
  id.address_ = address_of_valid_key(id.public_key_);
  return id;
}

AgentIdentity AgentIdentity::from_seed(std::uint64_t seed) {
  // sha256(tag || seed_be64 || counter_be32), retried until a valid scalar.
  for (std::uint32_t counter = 0;; ++counter) {
    Bytes material = to_bytes(kIdentityTag);
    for (int i = 7; i >= 0; --i) material.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    for (int i = 3; i >= 0; --i) material.push_back(static_cast<std::uint8_t>(counter >> (8 * i)));
    Digest32 d = sha256(material);
    if (secp256k1_ec_seckey_verify(context(), d.data())) {
      return from_secret(d.raw());
    }
  }
}

Signature AgentIdentity::sign(ByteView message) const {
  Digest32 digest = sha256(message);
  secp256k1_ecdsa_recoverable_signature rs;
  // nullptr nonce function selects RFC 6979 with HMAC-SHA256; output is low-s.
  if (!secp256k1_ecdsa_sign_recoverable(context(), &rs, digest.data(), secret_.data(), nullptr,
                                        nullptr)) {
    throw Error(Errc::InvalidSecretKey, "signing failed");
  }
  Signature out;
  int recid = 0;
  secp256k1_ecdsa_recoverable_signature_serialize_compact(context(), out.bytes.data(), &recid, &rs);
  out.bytes[64] = static_cast<std::uint8_t>(recid);
  out.signer = address_;
  return out;
}

bool verify(const PublicKey& public_key, ByteView message, const Signature& signature) {
  if (!parse_pubkey(public_key)) return false;
  if (address_of_valid_key(public_key) != signature.signer) return false;
  // Recovery succeeds with this key only if (r, s) verifies under it, and it
  // also pins the recovery id byte.
  auto recovered = recover_public_key(message, signature);
  return recovered && *recovered == public_key;
}

std::optional<PublicKey> recover_public_key(ByteView message, const Signature& signature) {
  auto rs = parse_recoverable(signature);
  if (!rs) return std::nullopt;
  secp256k1_ecdsa_signature plain;
  secp256k1_ecdsa_recoverable_signature_convert(context(), &plain, &*rs);
  // High-s encodings are rejected rather than normalized so that every signed
  // object has exactly one valid signature encoding.
  secp256k1_ecdsa_signature normalized;
  if (secp256k1_ecdsa_signature_normalize(context(), &normalized, &plain)) return std::nullopt;
  Digest32 digest = sha256(message);
  secp256k1_pubkey pk;
  if (!secp256k1_ecdsa_recover(context(), &pk, &*rs, digest.data())) return std::nullopt;
  return serialize_pubkey(pk);
}

bool verify_signer(ByteView message, const Signature& signature) {
  auto pk = recover_public_key(message, signature);
  return pk && address_of_valid_key(*pk) == signature.signer;
}

}  // namespace agentosi
