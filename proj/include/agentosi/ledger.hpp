#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "agentosi/amount.hpp"
#include "agentosi/bytes.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/crypto.hpp"

namespace agentosi {

enum class TxKind {
  RegisterIdentity,
  EscrowLock,
  EscrowRelease,
  EscrowRefund,
  AnchorOrder,
  AnchorDelivery,
};

std::string_view tx_kind_name(TxKind kind);
TxKind parse_tx_kind(std::string_view name);

struct GasSchedule {
  std::map<TxKind, std::uint64_t> gas = {
      {TxKind::RegisterIdentity, 46'000}, {TxKind::EscrowLock, 95'000},
      {TxKind::EscrowRelease, 64'000},    {TxKind::EscrowRefund, 64'000},
      {TxKind::AnchorOrder, 90'000},      {TxKind::AnchorDelivery, 77'000},
  };

  std::uint64_t of(TxKind kind) const { return gas.at(kind); }
  GasSchedule scaled(double factor) const;
};

struct LedgerConfig {
  std::int64_t block_time_ms = 2000;
  GasSchedule gas_schedule;
  std::map<Address, Amount> initial_balances;
  std::uint64_t chain_id = 31337;
  std::string escrow_ref = "escrow:agentosi-v1";
  // Inclusion cap per block; 0 means unlimited.
  std::uint64_t max_tx_per_block = 0;

  void validate() const;
};

enum class EscrowStatus { Locked, Released, Refunded };
std::string_view escrow_status_name(EscrowStatus s);

struct EscrowEntry {
  Digest32 quote_id;
  Digest32 request_hash;
  Address payer;
  Address payee;
  Amount amount;
  std::int64_t expiry_ms = 0;
  EscrowStatus status = EscrowStatus::Locked;
  std::optional<Digest32> evidence;  // provenance hash recorded on release
};

// ---- events ---------------------------------------------------------------

struct IdentityRegisteredEvent {
  Address address;
  PublicKey public_key;
  std::uint64_t block_number = 0;
  friend bool operator==(const IdentityRegisteredEvent&, const IdentityRegisteredEvent&) = default;
};

struct EscrowLockedEvent {
  Digest32 quote_id;
  Digest32 request_hash;
  Address payer;
  Address payee;
  Amount amount;
  std::int64_t expiry_ms = 0;
  std::uint64_t block_number = 0;
  friend bool operator==(const EscrowLockedEvent&, const EscrowLockedEvent&) = default;
};

struct EscrowReleasedEvent {
  Digest32 quote_id;
  Digest32 provenance_hash;
  Address payee;
  Amount amount;
  std::uint64_t block_number = 0;
  friend bool operator==(const EscrowReleasedEvent&, const EscrowReleasedEvent&) = default;
};

struct EscrowRefundedEvent {
  Digest32 quote_id;
  Address payer;
  Amount amount;
  std::uint64_t block_number = 0;
  friend bool operator==(const EscrowRefundedEvent&, const EscrowRefundedEvent&) = default;
};

struct AnchoredEvent {
  TxKind kind = TxKind::AnchorOrder;  // AnchorOrder or AnchorDelivery
  Digest32 anchor_hash;
  Address sender;
  std::uint64_t block_number = 0;
  friend bool operator==(const AnchoredEvent&, const AnchoredEvent&) = default;
};

using LedgerEvent = std::variant<IdentityRegisteredEvent, EscrowLockedEvent, EscrowReleasedEvent,
                                 EscrowRefundedEvent, AnchoredEvent>;

Json encode_event(const LedgerEvent& event);
// Throws Errc::MalformedObject for unknown or malformed records.
LedgerEvent decode_event(const Json& record);

// ---- transactions ---------------------------------------------------------

struct Transaction {
  TxKind kind = TxKind::RegisterIdentity;
  Address sender;
  std::uint64_t sender_nonce = 0;
  Json body;  // kind-specific fields
  Digest32 tx_hash;

  // {"body", "kind", "nonce", "sender"} in canonical form; tx_hash is its sha256.
  Json envelope_json() const;
};

enum class TxStatus { Success, Revert };

enum class RevertReason {
  None,
  UnregisteredSender,
  AlreadyRegistered,
  InvalidAmount,
  InsufficientBalance,
  DuplicateQuoteId,
  QuoteExpired,
  NotLocked,
  NotPayee,
  NotPayer,
  ZeroEvidence,
  NotExpired,
  MalformedBody,
};

std::string_view revert_reason_name(RevertReason r);
RevertReason parse_revert_reason(std::string_view name);

struct TxReceipt {
  Digest32 tx_hash;
  TxKind kind = TxKind::RegisterIdentity;
  Address sender;
  std::uint64_t block_number = 0;
  std::int64_t block_timestamp_ms = 0;
  std::int64_t submitted_ms = 0;
  std::uint64_t gas_used = 0;
  TxStatus status = TxStatus::Success;
  RevertReason revert_reason = RevertReason::None;
  std::vector<Json> logs;  // encoded events

  bool success() const { return status == TxStatus::Success; }
  std::int64_t confirmation_wait_ms() const { return block_timestamp_ms - submitted_ms; }
  std::vector<LedgerEvent> decode_events() const;

  Json to_json() const;
  static TxReceipt from_json(const Json& j);
};

std::uint64_t gas_total(const std::vector<TxReceipt>& receipts);

// Read access to confirmed receipts, implemented by the live ledger and by
// exported ledger logs loaded for offline audits.
class ReceiptSource {
 public:
  virtual ~ReceiptSource() = default;
  virtual std::optional<TxReceipt> find_receipt(const Digest32& tx_hash) const = 0;
  virtual std::vector<TxReceipt> all_receipts() const = 0;
};

struct PendingTx {
  Digest32 tx_hash;
  std::int64_t submitted_ms = 0;
  std::int64_t earliest_block_ms = 0;
};

// Single-writer settlement chain. Blocks exist at every multiple of
// block_time_ms; a transaction submitted at t lands in the first block with
// timestamp > t that still has capacity. State changes apply at inclusion.
class Ledger : public ReceiptSource {
 public:
  explicit Ledger(LedgerConfig config);

  const LedgerConfig& config() const { return config_; }
  std::int64_t block_time_ms() const { return config_.block_time_ms; }
  std::int64_t next_block_after(std::int64_t now_ms) const;

  // Genesis credit; only valid before the first block is produced.
  void add_genesis_balance(const Address& account, Amount amount);

  Transaction make_tx(TxKind kind, const Address& sender, Json body);
  PendingTx submit(const Transaction& tx, std::int64_t now_ms);

  // Produces every block with timestamp <= until_ms that has pending work.
  std::vector<TxReceipt> produce_blocks_until(std::int64_t until_ms);
  std::optional<std::int64_t> next_pending_block_ms() const;
  std::size_t pending_count() const;

  // Submits and produces blocks until the transaction is included.
  TxReceipt submit_and_confirm(const Transaction& tx, std::int64_t now_ms);

  // ---- typed transaction builders ----
  Transaction register_identity_tx(const AgentIdentity& identity);
  Transaction lock_tx(const Address& payer, const Digest32& quote_id, const Digest32& request_hash,
                      const Address& payee, Amount amount, std::int64_t expiry_ms);
  Transaction release_tx(const Address& payee, const Digest32& quote_id,
                         const Digest32& provenance_hash);
  Transaction refund_tx(const Address& payer, const Digest32& quote_id);
  Transaction anchor_tx(TxKind kind, const Address& sender, const Digest32& anchor_hash);

  // ---- synchronous helpers (submit + confirm) ----
  TxReceipt register_identity(const AgentIdentity& identity, std::int64_t now_ms);
  TxReceipt lock_escrow(const AgentIdentity& payer, const Digest32& quote_id,
                        const Digest32& request_hash, const Address& payee, Amount amount,
                        std::int64_t expiry_ms, std::int64_t now_ms);
  TxReceipt release_escrow(const AgentIdentity& payee, const Digest32& quote_id,
                           const Digest32& provenance_hash, std::int64_t now_ms);
  TxReceipt refund_escrow(const AgentIdentity& payer, const Digest32& quote_id,
                          std::int64_t now_ms);

  // ---- state ----
  Amount balance(const Address& account) const;
  std::optional<EscrowEntry> escrow(const Digest32& quote_id) const;
  bool is_registered(const Address& account) const;
  std::optional<PublicKey> registered_key(const Address& account) const;
  Amount total_balances() const;
  Amount total_locked() const;
  Amount genesis_supply() const { return genesis_supply_; }
  std::int64_t last_block_ms() const { return last_block_ms_; }

  std::optional<TxReceipt> find_receipt(const Digest32& tx_hash) const override;
  std::vector<TxReceipt> all_receipts() const override;

  // One JSON line per confirmed receipt, in inclusion order.
  std::string export_log_jsonl() const;

 private:
  struct Queued {
    Transaction tx;
    PendingTx pending;
  };

  TxReceipt apply(const Transaction& tx, std::int64_t submitted_ms, std::int64_t block_ms);
  RevertReason apply_effects(const Transaction& tx, std::uint64_t block_number,
                             std::int64_t block_ms, std::vector<Json>& logs);

  LedgerConfig config_;
  std::map<Address, Amount> balances_;
  std::map<Address, PublicKey> identities_;
  std::map<Digest32, EscrowEntry> escrows_;
  std::map<Address, std::uint64_t> nonces_;
  std::deque<Queued> pending_;
  std::vector<Digest32> receipt_order_;
  std::unordered_map<Digest32, TxReceipt, FixedBytesHash> receipts_;
  Amount genesis_supply_;
  std::int64_t last_block_ms_ = 0;
  bool produced_any_ = false;
  mutable std::mutex mutex_;
};

}  // namespace agentosi
