#include "agentosi/bytes.hpp"

namespace agentosi {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidHex: return "InvalidHex";
    case Errc::InvalidLength: return "InvalidLength";
    case Errc::NonCanonicalizable: return "NonCanonicalizable";
    case Errc::InvalidPublicKey: return "InvalidPublicKey";
    case Errc::InvalidSecretKey: return "InvalidSecretKey";
    case Errc::InvalidSignature: return "InvalidSignature";
    case Errc::UnknownReceiver: return "UnknownReceiver";
    case Errc::ClockRegression: return "ClockRegression";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::InvalidSchema: return "InvalidSchema";
    case Errc::NoPricing: return "NoPricing";
    case Errc::InvalidQuoteSignature: return "InvalidQuoteSignature";
    case Errc::QuoteExpired: return "QuoteExpired";
    case Errc::InsufficientBalance: return "InsufficientBalance";
    case Errc::BindingMismatch: return "BindingMismatch";
    case Errc::EmptyContent: return "EmptyContent";
    case Errc::NotFound: return "NotFound";
    case Errc::NotYetAvailable: return "NotYetAvailable";
    case Errc::IntegrityFailure: return "IntegrityFailure";
    case Errc::InvalidCid: return "InvalidCid";
    case Errc::MalformedObject: return "MalformedObject";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(data.size() * 2, '0');
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0x0f];
  }
  return out;
}

namespace {

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(Errc::InvalidHex, "odd number of hex digits");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(Errc::InvalidHex, "non-hex character at offset " + std::to_string(2 * i));
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

}  // namespace agentosi
