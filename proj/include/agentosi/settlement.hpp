#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "agentosi/amount.hpp"
#include "agentosi/bytes.hpp"
#include "agentosi/capability.hpp"
#include "agentosi/crypto.hpp"
#include "agentosi/ledger.hpp"
#include "agentosi/rng.hpp"

namespace agentosi {

enum class ReceiptSpecKind { OnChainEvent, ProcessorSigned, RollupReceipt };
std::string_view receipt_spec_kind_name(ReceiptSpecKind k);

struct ReceiptSpec {
  ReceiptSpecKind kind = ReceiptSpecKind::OnChainEvent;
  std::string event = "EscrowLocked";
  std::uint64_t min_confirmations = 1;

  Json to_json() const;
  static ReceiptSpec from_json(const Json& j);
  friend bool operator==(const ReceiptSpec&, const ReceiptSpec&) = default;
};

struct Quote {
  Amount price;
  std::string currency = "USDC";
  Address payee;
  std::uint64_t chain_id = 0;
  std::string escrow_ref;
  std::int64_t expiry_ms = 0;
  Nonce32 nonce;
  Digest32 request_hash;
  ReceiptSpec receipt_spec;
  Signature signature;

  // price, currency, payee, chainId, escrowRef, expiryMs, nonce,
  // requestHash, receiptSpec
  Json unsigned_json() const;
  Json to_json() const;
  static Quote from_json(const Json& j);

  bool signature_valid() const;
  friend bool operator==(const Quote&, const Quote&) = default;
};

// sha256(canonical unsigned quote || 65-byte signature || request_hash)
Digest32 quote_id(const Quote& quote);

struct PaymentChallenge {
  static constexpr int kStatusCode = 402;
  Quote quote;

  Json to_json() const;
  // Throws Errc::MalformedObject if statusCode is not 402.
  static PaymentChallenge from_json(const Json& j);
};

struct Receipt {
  Digest32 tx_hash;
  std::uint64_t block_number = 0;
  EscrowLockedEvent event;

  Json to_json() const;
  static Receipt from_json(const Json& j);
  friend bool operator==(const Receipt&, const Receipt&) = default;
};

enum class RejectReason {
  BindingMismatch,
  AmountMismatch,
  PayerMismatch,
  PayeeMismatch,
  QuoteExpired,
  TxNotFound,
  AlreadyConsumed,
  UnsupportedReceiptSpec,
  SignerMismatch,
  CidMismatch,
};

std::string_view reject_reason_name(RejectReason r);
RejectReason parse_reject_reason(std::string_view name);

enum class AssuranceLevel { SignedLog };
std::string_view assurance_level_name(AssuranceLevel a);

struct Verdict {
  bool accepted = false;
  std::optional<RejectReason> reason;
  std::string detail;

  static Verdict accept() { return {true, std::nullopt, {}}; }
  static Verdict reject(RejectReason r, std::string detail = {}) {
    return {false, r, std::move(detail)};
  }
  explicit operator bool() const { return accepted; }
  Json to_json() const;
};

// Service-agent side: builds the 402 challenge for a validated request.
// Throws Errc::NoPricing (or Errc::SchemaViolation) from the manifest's pricing.
PaymentChallenge issue_quote(const AgentIdentity& service_identity, const Digest32& request_hash,
                             const CapabilityManifest& manifest, const ServiceRequest& request,
                             std::int64_t now_ms, std::int64_t ttl_ms, Rng& rng,
                             std::uint64_t chain_id, const std::string& escrow_ref);

// User-agent side pre-payment checks; throws Errc::InvalidQuoteSignature or
// Errc::QuoteExpired.
void check_quote_payable(const Quote& quote, std::int64_t now_ms);

// Escrow lock bound to the quote. Submitted by the payer.
Transaction make_lock_tx(Ledger& ledger, const Address& payer, const Quote& quote);

// Receipt assembled from the decoded EscrowLocked event of a confirmed lock.
// Throws Errc::NotFound if the receipt carries no such event.
Receipt receipt_from_tx(const TxReceipt& confirmed);

// Checks the quote, locks escrow, waits for inclusion and returns the
// receipt. Throws Errc::InvalidQuoteSignature, Errc::QuoteExpired or
// Errc::InsufficientBalance (also for any other on-ledger revert, with the
// revert reason in the message).
Receipt pay_quote(const AgentIdentity& payer, Ledger& ledger, const Quote& quote,
                  std::int64_t now_ms);

// Accept iff the receipt names a successful lock visible by now_check_ms
// whose decoded event matches the receipt and binds this quote, request,
// payer, payee and price, locked before the quote expired.
Verdict verify_receipt(const ReceiptSource& ledger, const Receipt& receipt, const Quote& quote,
                       const Address& expected_payer, std::int64_t now_check_ms);

// Service-agent replay guard. Check-and-mark is a single atomic step; a
// completed session's delivery is cached so byte-identical retries get the
// same answer without re-execution.
class ConsumedReceipts {
 public:
  enum class Outcome { Accepted, Rejected, CachedRetry };
  struct Decision {
    Outcome outcome = Outcome::Rejected;
    Verdict verdict;
    std::optional<Json> cached_delivery;
  };

  Decision check_and_mark(const ReceiptSource& ledger, const Receipt& receipt, const Quote& quote,
                          const Address& expected_payer, std::int64_t now_check_ms);

  // Marks without verifying; for callers that already hold an Accept.
  void mark_consumed(const Digest32& quote_id, const Receipt& receipt, const Digest32& request_hash);
  void store_delivery(const Digest32& quote_id, Json delivery);
  bool is_consumed(const Digest32& quote_id) const;
  std::size_t size() const;

  Json snapshot() const;
  // Replaces the current state.
  void restore(const Json& snapshot);

 private:
  struct Entry {
    Digest32 receipt_digest;
    Digest32 request_hash;
    std::optional<Json> delivery;
  };
  std::map<Digest32, Entry> entries_;
  mutable std::mutex mutex_;
};

// Records quote_id as consumed. Precondition: verify_receipt accepted it.
void mark_receipt_consumed(ConsumedReceipts& state, const Receipt& receipt, const Quote& quote);

}  // namespace agentosi
