#include "agentosi/ledger.hpp"

#include <cmath>
#include <sstream>

namespace agentosi {

namespace {

constexpr std::pair<TxKind, std::string_view> kKindNames[] = {
    {TxKind::RegisterIdentity, "RegisterIdentity"}, {TxKind::EscrowLock, "EscrowLock"},
    {TxKind::EscrowRelease, "EscrowRelease"},       {TxKind::EscrowRefund, "EscrowRefund"},
    {TxKind::AnchorOrder, "AnchorOrder"},           {TxKind::AnchorDelivery, "AnchorDelivery"},
};

constexpr std::pair<RevertReason, std::string_view> kRevertNames[] = {
    {RevertReason::None, "None"},
    {RevertReason::UnregisteredSender, "UnregisteredSender"},
    {RevertReason::AlreadyRegistered, "AlreadyRegistered"},
    {RevertReason::InvalidAmount, "InvalidAmount"},
    {RevertReason::InsufficientBalance, "InsufficientBalance"},
    {RevertReason::DuplicateQuoteId, "DuplicateQuoteId"},
    {RevertReason::QuoteExpired, "QuoteExpired"},
    {RevertReason::NotLocked, "NotLocked"},
    {RevertReason::NotPayee, "NotPayee"},
    {RevertReason::NotPayer, "NotPayer"},
    {RevertReason::ZeroEvidence, "ZeroEvidence"},
    {RevertReason::NotExpired, "NotExpired"},
    {RevertReason::MalformedBody, "MalformedBody"},
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view tx_kind_name(TxKind kind) {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "Unknown";
}

TxKind parse_tx_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(Errc::MalformedObject, "unknown tx kind '" + std::string(name) + "'");
}

std::string_view revert_reason_name(RevertReason r) {
  for (const auto& [k, n] : kRevertNames) {
    if (k == r) return n;
  }
  return "Unknown";
}

RevertReason parse_revert_reason(std::string_view name) {
  for (const auto& [k, n] : kRevertNames) {
    if (n == name) return k;
  }
  throw Error(Errc::MalformedObject, "unknown revert reason '" + std::string(name) + "'");
}

std::string_view escrow_status_name(EscrowStatus s) {
  switch (s) {
    case EscrowStatus::Locked: return "Locked";
    case EscrowStatus::Released: return "Released";
    case EscrowStatus::Refunded: return "Refunded";
  }
  return "Unknown";
}

GasSchedule GasSchedule::scaled(double factor) const {
  GasSchedule out;
  for (auto& [kind, g] : out.gas) {
    g = static_cast<std::uint64_t>(std::llround(static_cast<double>(gas.at(kind)) * factor));
  }
  return out;
}

void LedgerConfig::validate() const {
  if (block_time_ms <= 0) throw Error(Errc::Config, "block_time_ms must be > 0");
  for (const auto& [kind, g] : gas_schedule.gas) {
    if (g == 0) {
      throw Error(Errc::Config, "gas for " + std::string(tx_kind_name(kind)) + " must be > 0");
    }
  }
  for (const auto& [addr, amount] : initial_balances) {
    if (amount.micros() < 0) throw Error(Errc::Config, "negative initial balance");
  }
}

// ---- events ---------------------------------------------------------------

Json encode_event(const LedgerEvent& event) {
  return std::visit(
      Overloaded{
          [](const IdentityRegisteredEvent& e) {
            return Json{{"event", "IdentityRegistered"},
                        {"address", e.address.hex()},
                        {"publicKey", e.public_key.hex()},
                        {"blockNumber", e.block_number}};
          },
          [](const EscrowLockedEvent& e) {
            return Json{{"event", "EscrowLocked"},       {"quoteId", e.quote_id.hex()},
                        {"requestHash", e.request_hash.hex()}, {"payer", e.payer.hex()},
                        {"payee", e.payee.hex()},        {"amount", e.amount.micros()},
                        {"expiryMs", e.expiry_ms},       {"blockNumber", e.block_number}};
          },
          [](const EscrowReleasedEvent& e) {
            return Json{{"event", "EscrowReleased"},
                        {"quoteId", e.quote_id.hex()},
                        {"provenanceHash", e.provenance_hash.hex()},
                        {"payee", e.payee.hex()},
                        {"amount", e.amount.micros()},
                        {"blockNumber", e.block_number}};
          },
          [](const EscrowRefundedEvent& e) {
            return Json{{"event", "EscrowRefunded"},
                        {"quoteId", e.quote_id.hex()},
                        {"payer", e.payer.hex()},
                        {"amount", e.amount.micros()},
                        {"blockNumber", e.block_number}};
          },
          [](const AnchoredEvent& e) {
            return Json{{"event", "Anchored"},
                        {"kind", tx_kind_name(e.kind)},
                        {"anchorHash", e.anchor_hash.hex()},
                        {"sender", e.sender.hex()},
                        {"blockNumber", e.block_number}};
          },
      },
      event);
}

LedgerEvent decode_event(const Json& r) {
  const std::string name = require_string(r, "event");
  if (name == "IdentityRegistered") {
    return IdentityRegisteredEvent{require_fixed<Address>(r, "address"),
                                   require_fixed<PublicKey>(r, "publicKey"),
                                   require_uint(r, "blockNumber")};
  }
  if (name == "EscrowLocked") {
    return EscrowLockedEvent{require_fixed<Digest32>(r, "quoteId"),
                             require_fixed<Digest32>(r, "requestHash"),
                             require_fixed<Address>(r, "payer"),
                             require_fixed<Address>(r, "payee"),
                             Amount::from_micros(require_int(r, "amount")),
                             require_int(r, "expiryMs"),
                             require_uint(r, "blockNumber")};
  }
  if (name == "EscrowReleased") {
    return EscrowReleasedEvent{require_fixed<Digest32>(r, "quoteId"),
                               require_fixed<Digest32>(r, "provenanceHash"),
                               require_fixed<Address>(r, "payee"),
                               Amount::from_micros(require_int(r, "amount")),
                               require_uint(r, "blockNumber")};
  }
  if (name == "EscrowRefunded") {
    return EscrowRefundedEvent{require_fixed<Digest32>(r, "quoteId"),
                               require_fixed<Address>(r, "payer"),
                               Amount::from_micros(require_int(r, "amount")),
                               require_uint(r, "blockNumber")};
  }
  if (name == "Anchored") {
    AnchoredEvent e{parse_tx_kind(require_string(r, "kind")), require_fixed<Digest32>(r, "anchorHash"),
                    require_fixed<Address>(r, "sender"), require_uint(r, "blockNumber")};
    if (e.kind != TxKind::AnchorOrder && e.kind != TxKind::AnchorDelivery) {
      throw Error(Errc::MalformedObject, "anchor event with non-anchor kind");
    }
    return e;
  }
  throw Error(Errc::MalformedObject, "unknown event '" + name + "'");
}

// ---- transactions ---------------------------------------------------------

Json Transaction::envelope_json() const {
  return Json{{"kind", tx_kind_name(kind)},
              {"sender", sender.hex()},
              {"nonce", sender_nonce},
              {"body", body}};
}

std::vector<LedgerEvent> TxReceipt::decode_events() const {
  std::vector<LedgerEvent> out;
  out.reserve(logs.size());
  for (const auto& l : logs) out.push_back(decode_event(l));
  return out;
}

Json TxReceipt::to_json() const {
  return Json{{"txHash", tx_hash.hex()},
              {"kind", tx_kind_name(kind)},
              {"sender", sender.hex()},
              {"blockNumber", block_number},
              {"blockTimestampMs", block_timestamp_ms},
              {"submittedMs", submitted_ms},
              {"gasUsed", gas_used},
              {"status", success() ? "success" : "revert"},
              {"revertReason", revert_reason_name(revert_reason)},
              {"logs", logs}};
}

TxReceipt TxReceipt::from_json(const Json& j) {
  TxReceipt r;
  r.tx_hash = require_fixed<Digest32>(j, "txHash");
  r.kind = parse_tx_kind(require_string(j, "kind"));
  r.sender = require_fixed<Address>(j, "sender");
  r.block_number = require_uint(j, "blockNumber");
  r.block_timestamp_ms = require_int(j, "blockTimestampMs");
  r.submitted_ms = require_int(j, "submittedMs");
  r.gas_used = require_uint(j, "gasUsed");
  const std::string status = require_string(j, "status");
  if (status != "success" && status != "revert") {
    throw Error(Errc::MalformedObject, "bad receipt status");
  }
  r.status = status == "success" ? TxStatus::Success : TxStatus::Revert;
  r.revert_reason = parse_revert_reason(require_string(j, "revertReason"));
  const Json& logs = require(j, "logs");
  if (!logs.is_array()) throw Error(Errc::MalformedObject, "logs must be an array");
  for (const auto& l : logs) r.logs.push_back(l);
  return r;
}

std::uint64_t gas_total(const std::vector<TxReceipt>& receipts) {
  std::uint64_t total = 0;
  for (const auto& r : receipts) total += r.gas_used;
  return total;
}

// ---- ledger ---------------------------------------------------------------

Ledger::Ledger(LedgerConfig config) : config_(std::move(config)) {
  config_.validate();
  for (const auto& [addr, amount] : config_.initial_balances) {
    balances_[addr] += amount;
    genesis_supply_ += amount;
  }
}

std::int64_t Ledger::next_block_after(std::int64_t now_ms) const {
  const std::int64_t bt = config_.block_time_ms;
  std::int64_t b = (now_ms >= 0 ? now_ms / bt : (now_ms - bt + 1) / bt) * bt + bt;
  return b;
}

void Ledger::add_genesis_balance(const Address& account, Amount amount) {
  std::lock_guard lock(mutex_);
  if (produced_any_) throw Error(Errc::ClockRegression, "genesis credit after first block");
  if (amount.micros() < 0) throw Error(Errc::Config, "negative genesis credit");
  balances_[account] += amount;
  genesis_supply_ += amount;
}

Transaction Ledger::make_tx(TxKind kind, const Address& sender, Json body) {
  std::lock_guard lock(mutex_);
  Transaction tx;
  tx.kind = kind;
  tx.sender = sender;
  tx.sender_nonce = nonces_[sender]++;
  tx.body = std::move(body);
  tx.tx_hash = sha256(canonicalize(tx.envelope_json()));
  return tx;
}

PendingTx Ledger::submit(const Transaction& tx, std::int64_t now_ms) {
  std::lock_guard lock(mutex_);
  if (produced_any_ && now_ms < last_block_ms_) {
    throw Error(Errc::ClockRegression, "submission at " + std::to_string(now_ms) +
                                           " precedes produced block " +
                                           std::to_string(last_block_ms_));
  }
  PendingTx p{tx.tx_hash, now_ms, next_block_after(now_ms)};
  pending_.push_back({tx, p});
  return p;
}

std::optional<std::int64_t> Ledger::next_pending_block_ms() const {
  std::lock_guard lock(mutex_);
  if (pending_.empty()) return std::nullopt;
  std::int64_t b = pending_.front().pending.earliest_block_ms;
  if (produced_any_) b = std::max(b, last_block_ms_ + config_.block_time_ms);
  return b;
}

std::size_t Ledger::pending_count() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

std::vector<TxReceipt> Ledger::produce_blocks_until(std::int64_t until_ms) {
  std::vector<TxReceipt> out;
  for (;;) {
    auto next = next_pending_block_ms();
    if (!next || *next > until_ms) break;
    std::lock_guard lock(mutex_);
    const std::int64_t block_ms = *next;
    std::uint64_t included = 0;
    while (!pending_.empty() && pending_.front().pending.earliest_block_ms <= block_ms &&
           (config_.max_tx_per_block == 0 || included < config_.max_tx_per_block)) {
      Queued q = std::move(pending_.front());
      pending_.pop_front();
      out.push_back(apply(q.tx, q.pending.submitted_ms, block_ms));
      ++included;
    }
    last_block_ms_ = block_ms;
    produced_any_ = true;
  }
  return out;
}

TxReceipt Ledger::submit_and_confirm(const Transaction& tx, std::int64_t now_ms) {
  submit(tx, now_ms);
  for (;;) {
    auto next = next_pending_block_ms();
    if (!next) break;
    produce_blocks_until(*next);
    if (auto r = find_receipt(tx.tx_hash)) return *r;
  }
  throw Error(Errc::NotFound, "transaction was not included");
}

TxReceipt Ledger::apply(const Transaction& tx, std::int64_t submitted_ms, std::int64_t block_ms) {
  TxReceipt r;
  r.tx_hash = tx.tx_hash;
  r.kind = tx.kind;
  r.sender = tx.sender;
  r.block_number = static_cast<std::uint64_t>(block_ms / config_.block_time_ms);
  r.block_timestamp_ms = block_ms;
  r.submitted_ms = submitted_ms;
  r.gas_used = config_.gas_schedule.of(tx.kind);
  RevertReason reason = RevertReason::MalformedBody;
  try {
    reason = apply_effects(tx, r.block_number, block_ms, r.logs);
  } catch (const Error&) {
    r.logs.clear();
  }
  r.status = reason == RevertReason::None ? TxStatus::Success : TxStatus::Revert;
  r.revert_reason = reason;
  if (!r.success()) r.logs.clear();
  receipt_order_.push_back(r.tx_hash);
  receipts_.emplace(r.tx_hash, r);
  return r;
}

RevertReason Ledger::apply_effects(const Transaction& tx, std::uint64_t block_number,
                                   std::int64_t block_ms, std::vector<Json>& logs) {
  const Json& b = tx.body;
  if (tx.kind == TxKind::RegisterIdentity) {
    auto pk = require_fixed<PublicKey>(b, "publicKey");
    if (derive_address(pk) != tx.sender) return RevertReason::MalformedBody;
    if (identities_.contains(tx.sender)) return RevertReason::AlreadyRegistered;
    identities_.emplace(tx.sender, pk);
    logs.push_back(encode_event(IdentityRegisteredEvent{tx.sender, pk, block_number}));
    return RevertReason::None;
  }
  if (!identities_.contains(tx.sender)) return RevertReason::UnregisteredSender;

  switch (tx.kind) {
    case TxKind::EscrowLock: {
      EscrowEntry e;
      e.quote_id = require_fixed<Digest32>(b, "quoteId");
      e.request_hash = require_fixed<Digest32>(b, "requestHash");
      e.payer = tx.sender;
      e.payee = require_fixed<Address>(b, "payee");
      e.amount = Amount::from_micros(require_int(b, "amount"));
      e.expiry_ms = require_int(b, "expiryMs");
      if (!e.amount.is_positive()) return RevertReason::InvalidAmount;
      if (block_ms >= e.expiry_ms) return RevertReason::QuoteExpired;
      if (escrows_.contains(e.quote_id)) return RevertReason::DuplicateQuoteId;
      Amount& bal = balances_[tx.sender];
      if (bal < e.amount) return RevertReason::InsufficientBalance;
      bal -= e.amount;
      escrows_.emplace(e.quote_id, e);
      logs.push_back(encode_event(EscrowLockedEvent{e.quote_id, e.request_hash, e.payer, e.payee,
                                                    e.amount, e.expiry_ms, block_number}));
      return RevertReason::None;
    }
    case TxKind::EscrowRelease: {
      auto qid = require_fixed<Digest32>(b, "quoteId");
      auto evidence = require_fixed<Digest32>(b, "provenanceHash");
      auto it = escrows_.find(qid);
      if (it == escrows_.end() || it->second.status != EscrowStatus::Locked) {
        return RevertReason::NotLocked;
      }
      EscrowEntry& e = it->second;
      if (tx.sender != e.payee) return RevertReason::NotPayee;
      if (evidence.is_zero()) return RevertReason::ZeroEvidence;
      e.status = EscrowStatus::Released;
      e.evidence = evidence;
      balances_[e.payee] += e.amount;
      logs.push_back(
          encode_event(EscrowReleasedEvent{qid, evidence, e.payee, e.amount, block_number}));
      return RevertReason::None;
    }
    case TxKind::EscrowRefund: {
      auto qid = require_fixed<Digest32>(b, "quoteId");
      auto it = escrows_.find(qid);
      if (it == escrows_.end() || it->second.status != EscrowStatus::Locked) {
        return RevertReason::NotLocked;
      }
      EscrowEntry& e = it->second;
      if (tx.sender != e.payer) return RevertReason::NotPayer;
      if (block_ms < e.expiry_ms) return RevertReason::NotExpired;
      e.status = EscrowStatus::Refunded;
      balances_[e.payer] += e.amount;
      logs.push_back(encode_event(EscrowRefundedEvent{qid, e.payer, e.amount, block_number}));
      return RevertReason::None;
    }
    case TxKind::AnchorOrder:
    case TxKind::AnchorDelivery: {
      auto h = require_fixed<Digest32>(b, "anchorHash");
      logs.push_back(encode_event(AnchoredEvent{tx.kind, h, tx.sender, block_number}));
      return RevertReason::None;
    }
    case TxKind::RegisterIdentity:
      break;
  }
  return RevertReason::MalformedBody;
}

Transaction Ledger::register_identity_tx(const AgentIdentity& identity) {
  return make_tx(TxKind::RegisterIdentity, identity.address(),
                 Json{{"publicKey", identity.public_key().hex()}});
}

Transaction Ledger::lock_tx(const Address& payer, const Digest32& quote_id,
                            const Digest32& request_hash, const Address& payee, Amount amount,
                            std::int64_t expiry_ms) {
  return make_tx(TxKind::EscrowLock, payer,
                 Json{{"quoteId", quote_id.hex()},
                      {"requestHash", request_hash.hex()},
                      {"payee", payee.hex()},
                      {"amount", amount.micros()},
                      {"expiryMs", expiry_ms}});
}

Transaction Ledger::release_tx(const Address& payee, const Digest32& quote_id,
                               const Digest32& provenance_hash) {
  return make_tx(TxKind::EscrowRelease, payee,
                 Json{{"quoteId", quote_id.hex()}, {"provenanceHash", provenance_hash.hex()}});
}

Transaction Ledger::refund_tx(const Address& payer, const Digest32& quote_id) {
  return make_tx(TxKind::EscrowRefund, payer, Json{{"quoteId", quote_id.hex()}});
}

Transaction Ledger::anchor_tx(TxKind kind, const Address& sender, const Digest32& anchor_hash) {
  if (kind != TxKind::AnchorOrder && kind != TxKind::AnchorDelivery) {
    throw Error(Errc::MalformedObject, "anchor_tx needs an anchor kind");
  }
  return make_tx(kind, sender, Json{{"anchorHash", anchor_hash.hex()}});
}

TxReceipt Ledger::register_identity(const AgentIdentity& identity, std::int64_t now_ms) {
  return submit_and_confirm(register_identity_tx(identity), now_ms);
}

TxReceipt Ledger::lock_escrow(const AgentIdentity& payer, const Digest32& quote_id,
                              const Digest32& request_hash, const Address& payee, Amount amount,
                              std::int64_t expiry_ms, std::int64_t now_ms) {
  return submit_and_confirm(lock_tx(payer.address(), quote_id, request_hash, payee, amount, expiry_ms),
                            now_ms);
}

TxReceipt Ledger::release_escrow(const AgentIdentity& payee, const Digest32& quote_id,
                                 const Digest32& provenance_hash, std::int64_t now_ms) {
  return submit_and_confirm(release_tx(payee.address(), quote_id, provenance_hash), now_ms);
}

TxReceipt Ledger::refund_escrow(const AgentIdentity& payer, const Digest32& quote_id,
                                std::int64_t now_ms) {
  return submit_and_confirm(refund_tx(payer.address(), quote_id), now_ms);
}

Amount Ledger::balance(const Address& account) const {
  std::lock_guard lock(mutex_);
  auto it = balances_.find(account);
  return it == balances_.end() ? Amount{} : it->second;
}

std::optional<EscrowEntry> Ledger::escrow(const Digest32& quote_id) const {
  std::lock_guard lock(mutex_);
  auto it = escrows_.find(quote_id);
  if (it == escrows_.end()) return std::nullopt;
  return it->second;
}

bool Ledger::is_registered(const Address& account) const {
  std::lock_guard lock(mutex_);
  return identities_.contains(account);
}

std::optional<PublicKey> Ledger::registered_key(const Address& account) const {
  std::lock_guard lock(mutex_);
  auto it = identities_.find(account);
  if (it == identities_.end()) return std::nullopt;
  return it->second;
}

Amount Ledger::total_balances() const {
  std::lock_guard lock(mutex_);
  Amount sum;
  for (const auto& [a, v] : balances_) sum += v;
  return sum;
}

Amount Ledger::total_locked() const {
  std::lock_guard lock(mutex_);
  Amount sum;
  for (const auto& [q, e] : escrows_) {
    if (e.status == EscrowStatus::Locked) sum += e.amount;
  }
  return sum;
}

std::optional<TxReceipt> Ledger::find_receipt(const Digest32& tx_hash) const {
  std::lock_guard lock(mutex_);
  auto it = receipts_.find(tx_hash);
  if (it == receipts_.end()) return std::nullopt;
  return it->second;
}

std::vector<TxReceipt> Ledger::all_receipts() const {
  std::lock_guard lock(mutex_);
  std::vector<TxReceipt> out;
  out.reserve(receipt_order_.size());
  for (const auto& h : receipt_order_) out.push_back(receipts_.at(h));
  return out;
}

std::string Ledger::export_log_jsonl() const {
  std::ostringstream os;
  for (const auto& r : all_receipts()) os << canonicalize(r.to_json()) << '\n';
  return os.str();
}

}  // namespace agentosi
