#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agentosi {

// Contract violations raised as exceptions. Protocol-level rejections
// (receipt or provenance verdicts, ledger reverts) are values, not errors.
enum class Errc {
  InvalidHex,
  InvalidLength,
  NonCanonicalizable,
  InvalidPublicKey,
  InvalidSecretKey,
  InvalidSignature,
  UnknownReceiver,
  ClockRegression,
  SchemaViolation,
  InvalidSchema,
  NoPricing,
  InvalidQuoteSignature,
  QuoteExpired,
  InsufficientBalance,
  BindingMismatch,
  EmptyContent,
  NotFound,
  NotYetAvailable,
  IntegrityFailure,
  InvalidCid,
  MalformedObject,
  Config,
  Io,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace agentosi
