#include "agentosi/settlement.hpp"

#include <algorithm>
#include <cstring>

namespace agentosi {

namespace {

constexpr std::pair<RejectReason, std::string_view> kReasonNames[] = {
    {RejectReason::BindingMismatch, "BindingMismatch"},
    {RejectReason::AmountMismatch, "AmountMismatch"},
    {RejectReason::PayerMismatch, "PayerMismatch"},
    {RejectReason::PayeeMismatch, "PayeeMismatch"},
    {RejectReason::QuoteExpired, "QuoteExpired"},
    {RejectReason::TxNotFound, "TxNotFound"},
    {RejectReason::AlreadyConsumed, "AlreadyConsumed"},
    {RejectReason::UnsupportedReceiptSpec, "UnsupportedReceiptSpec"},
    {RejectReason::SignerMismatch, "SignerMismatch"},
    {RejectReason::CidMismatch, "CidMismatch"},
};

Digest32 receipt_digest(const Receipt& r) { return sha256(canonicalize(r.to_json())); }

}  // namespace

std::string_view receipt_spec_kind_name(ReceiptSpecKind k) {
  switch (k) {
    case ReceiptSpecKind::OnChainEvent: return "OnChainEvent";
    case ReceiptSpecKind::ProcessorSigned: return "ProcessorSigned";
    case ReceiptSpecKind::RollupReceipt: return "RollupReceipt";
  }
  return "OnChainEvent";
}

std::string_view reject_reason_name(RejectReason r) {
  for (const auto& [k, n] : kReasonNames) {
    if (k == r) return n;
  }
  return "Unknown";
}

RejectReason parse_reject_reason(std::string_view name) {
  for (const auto& [k, n] : kReasonNames) {
    if (n == name) return k;
  }
  throw Error(Errc::MalformedObject, "unknown reject reason '" + std::string(name) + "'");
}

std::string_view assurance_level_name(AssuranceLevel) { return "SignedLog"; }

Json Verdict::to_json() const {
  Json j{{"accepted", accepted}};
  if (reason) j["reason"] = reject_reason_name(*reason);
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

Json ReceiptSpec::to_json() const {
  return Json{{"kind", receipt_spec_kind_name(kind)},
              {"event", event},
              {"minConfirmations", min_confirmations}};
}

ReceiptSpec ReceiptSpec::from_json(const Json& j) {
  ReceiptSpec s;
  const std::string kind = require_string(j, "kind");
  bool known = false;
  for (auto k : {ReceiptSpecKind::OnChainEvent, ReceiptSpecKind::ProcessorSigned,
                 ReceiptSpecKind::RollupReceipt}) {
    if (receipt_spec_kind_name(k) == kind) {
      s.kind = k;
      known = true;
    }
  }
  if (!known) throw Error(Errc::MalformedObject, "unknown receipt spec kind '" + kind + "'");
  s.event = require_string(j, "event");
  s.min_confirmations = require_uint(j, "minConfirmations");
  return s;
}

Json Quote::unsigned_json() const {
  return Json{{"price", price.micros()},
              {"currency", currency},
              {"payee", payee.hex()},
              {"chainId", chain_id},
              {"escrowRef", escrow_ref},
              {"expiryMs", expiry_ms},
              {"nonce", nonce.hex()},
              {"requestHash", request_hash.hex()},
              {"receiptSpec", receipt_spec.to_json()}};
}

Json Quote::to_json() const {
  Json j = unsigned_json();
  j["signature"] = signature.to_json();
  return j;
}

Quote Quote::from_json(const Json& j) {
  Quote q;
  q.price = Amount::from_micros(require_int(j, "price"));
  q.currency = require_string(j, "currency");
  q.payee = require_fixed<Address>(j, "payee");
  q.chain_id = require_uint(j, "chainId");
  q.escrow_ref = require_string(j, "escrowRef");
  q.expiry_ms = require_int(j, "expiryMs");
  q.nonce = require_fixed<Nonce32>(j, "nonce");
  q.request_hash = require_fixed<Digest32>(j, "requestHash");
  q.receipt_spec = ReceiptSpec::from_json(require(j, "receiptSpec"));
  q.signature = Signature::from_json(require(j, "signature"));
  return q;
}

bool Quote::signature_valid() const {
  return signature.signer == payee && verify_signer(canonicalize(unsigned_json()), signature);
}

Digest32 quote_id(const Quote& quote) {
  Bytes material = canonical_bytes(quote.unsigned_json());
  material.insert(material.end(), quote.signature.bytes.begin(), quote.signature.bytes.end());
  material.insert(material.end(), quote.request_hash.raw().begin(), quote.request_hash.raw().end());
  return sha256(material);
}

Json PaymentChallenge::to_json() const {
  return Json{{"statusCode", kStatusCode}, {"quote", quote.to_json()}};
}

PaymentChallenge PaymentChallenge::from_json(const Json& j) {
  if (require_int(j, "statusCode") != kStatusCode) {
    throw Error(Errc::MalformedObject, "payment challenge must carry status 402");
  }
  return PaymentChallenge{Quote::from_json(require(j, "quote"))};
}

Json Receipt::to_json() const {
  return Json{{"txHash", tx_hash.hex()},
              {"blockNumber", block_number},
              {"event", encode_event(event)}};
}

Receipt Receipt::from_json(const Json& j) {
  Receipt r;
  r.tx_hash = require_fixed<Digest32>(j, "txHash");
  r.block_number = require_uint(j, "blockNumber");
  auto ev = decode_event(require(j, "event"));
  if (!std::holds_alternative<EscrowLockedEvent>(ev)) {
    throw Error(Errc::MalformedObject, "receipt event must be EscrowLocked");
  }
  r.event = std::get<EscrowLockedEvent>(ev);
  return r;
}

PaymentChallenge issue_quote(const AgentIdentity& service_identity, const Digest32& request_hash,
                             const CapabilityManifest& manifest, const ServiceRequest& request,
                             std::int64_t now_ms, std::int64_t ttl_ms, Rng& rng,
                             std::uint64_t chain_id, const std::string& escrow_ref) {
  if (request_digest(request) != request_hash) {
    throw Error(Errc::BindingMismatch, "request hash does not match the request");
  }
  Quote q;
  q.price = price_request(manifest, request);
  q.currency = manifest.pricing.currency;
  q.payee = service_identity.address();
  q.chain_id = chain_id;
  q.escrow_ref = escrow_ref;
  q.expiry_ms = now_ms + ttl_ms;
  q.nonce = rng.fixed_bytes<Nonce32>();
  q.request_hash = request_hash;
  q.signature = service_identity.sign(canonicalize(q.unsigned_json()));
  return PaymentChallenge{std::move(q)};
}

void check_quote_payable(const Quote& quote, std::int64_t now_ms) {
  if (!quote.signature_valid()) {
    throw Error(Errc::InvalidQuoteSignature, "quote signature does not verify against payee");
  }
  if (now_ms >= quote.expiry_ms) {
    throw Error(Errc::QuoteExpired, "quote expired at " + std::to_string(quote.expiry_ms));
  }
}

Transaction make_lock_tx(Ledger& ledger, const Address& payer, const Quote& quote) {
  return ledger.lock_tx(payer, quote_id(quote), quote.request_hash, quote.payee, quote.price,
                        quote.expiry_ms);
}

Receipt receipt_from_tx(const TxReceipt& confirmed) {
  for (const auto& ev : confirmed.decode_events()) {
    if (const auto* locked = std::get_if<EscrowLockedEvent>(&ev)) {
      return Receipt{confirmed.tx_hash, confirmed.block_number, *locked};
    }
  }
  throw Error(Errc::NotFound, "transaction carries no EscrowLocked event");
}

Receipt pay_quote(const AgentIdentity& payer, Ledger& ledger, const Quote& quote,
                  std::int64_t now_ms) {
  check_quote_payable(quote, now_ms);
  if (ledger.balance(payer.address()) < quote.price) {
    throw Error(Errc::InsufficientBalance, "balance below quoted price");
  }
  TxReceipt confirmed = ledger.submit_and_confirm(make_lock_tx(ledger, payer.address(), quote), now_ms);
  if (!confirmed.success()) {
    const std::string why(revert_reason_name(confirmed.revert_reason));
    switch (confirmed.revert_reason) {
      case RevertReason::QuoteExpired: throw Error(Errc::QuoteExpired, "lock reverted: " + why);
      case RevertReason::InsufficientBalance:
        throw Error(Errc::InsufficientBalance, "lock reverted: " + why);
      default: throw Error(Errc::BindingMismatch, "lock reverted: " + why);
    }
  }
  return receipt_from_tx(confirmed);
}

Verdict verify_receipt(const ReceiptSource& ledger, const Receipt& receipt, const Quote& quote,
                       const Address& expected_payer, std::int64_t now_check_ms) {
  if (quote.receipt_spec.kind != ReceiptSpecKind::OnChainEvent) {
    return Verdict::reject(RejectReason::UnsupportedReceiptSpec,
                           std::string(receipt_spec_kind_name(quote.receipt_spec.kind)));
  }
  auto tx = ledger.find_receipt(receipt.tx_hash);
  if (!tx || !tx->success() || tx->kind != TxKind::EscrowLock ||
      tx->block_number != receipt.block_number || tx->block_timestamp_ms > now_check_ms) {
    return Verdict::reject(RejectReason::TxNotFound, receipt.tx_hash.hex());
  }
  const EscrowLockedEvent& ev = receipt.event;
  if (ev.quote_id != quote_id(quote)) {
    return Verdict::reject(RejectReason::BindingMismatch, "quote_id");
  }
  if (ev.request_hash != quote.request_hash) {
    return Verdict::reject(RejectReason::BindingMismatch, "request_hash");
  }
  if (ev.payer != expected_payer) return Verdict::reject(RejectReason::PayerMismatch);
  if (ev.payee != quote.payee) return Verdict::reject(RejectReason::PayeeMismatch);
  if (ev.amount != quote.price) {
    return Verdict::reject(RejectReason::AmountMismatch,
                           ev.amount.to_string() + " != " + quote.price.to_string());
  }
  std::optional<EscrowLockedEvent> on_ledger;
  for (const auto& decoded : tx->decode_events()) {
    if (const auto* locked = std::get_if<EscrowLockedEvent>(&decoded)) on_ledger = *locked;
  }
  if (!on_ledger || *on_ledger != ev) {
    return Verdict::reject(RejectReason::BindingMismatch, "event differs from ledger log");
  }
  if (tx->block_timestamp_ms >= quote.expiry_ms) {
    return Verdict::reject(RejectReason::QuoteExpired, "locked after quote expiry");
  }
  return Verdict::accept();
}

ConsumedReceipts::Decision ConsumedReceipts::check_and_mark(const ReceiptSource& ledger,
                                                            const Receipt& receipt,
                                                            const Quote& quote,
                                                            const Address& expected_payer,
                                                            std::int64_t now_check_ms) {
  std::lock_guard lock(mutex_);
  const Digest32 claimed = receipt.event.quote_id;
  const Digest32 own = quote_id(quote);
  for (const Digest32& key : {claimed, own}) {
    auto it = entries_.find(key);
    if (it == entries_.end()) continue;
    const Entry& e = it->second;
    if (key == own && e.receipt_digest == receipt_digest(receipt) &&
        e.request_hash == quote.request_hash && e.delivery) {
      return {Outcome::CachedRetry, Verdict::accept(), e.delivery};
    }
    return {Outcome::Rejected, Verdict::reject(RejectReason::AlreadyConsumed, key.hex()), {}};
  }
  Verdict v = verify_receipt(ledger, receipt, quote, expected_payer, now_check_ms);
  if (!v) return {Outcome::Rejected, v, {}};
  entries_.emplace(own, Entry{receipt_digest(receipt), quote.request_hash, std::nullopt});
  return {Outcome::Accepted, v, {}};
}

void ConsumedReceipts::mark_consumed(const Digest32& qid, const Receipt& receipt,
                                     const Digest32& request_hash) {
  std::lock_guard lock(mutex_);
  entries_.try_emplace(qid, Entry{receipt_digest(receipt), request_hash, std::nullopt});
}

void ConsumedReceipts::store_delivery(const Digest32& qid, Json delivery) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(qid);
  if (it != entries_.end()) it->second.delivery = std::move(delivery);
}

bool ConsumedReceipts::is_consumed(const Digest32& qid) const {
  std::lock_guard lock(mutex_);
  return entries_.contains(qid);
}

std::size_t ConsumedReceipts::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

Json ConsumedReceipts::snapshot() const {
  std::lock_guard lock(mutex_);
  Json list = Json::array();
  for (const auto& [qid, e] : entries_) {
    Json item{{"quoteId", qid.hex()},
              {"receiptDigest", e.receipt_digest.hex()},
              {"requestHash", e.request_hash.hex()}};
    if (e.delivery) item["delivery"] = *e.delivery;
    list.push_back(std::move(item));
  }
  return Json{{"consumed", list}};
}

void ConsumedReceipts::restore(const Json& snapshot) {
  std::map<Digest32, Entry> restored;
  const Json& list = require(snapshot, "consumed");
  if (!list.is_array()) throw Error(Errc::MalformedObject, "consumed must be an array");
  for (const auto& item : list) {
    Entry e{require_fixed<Digest32>(item, "receiptDigest"), require_fixed<Digest32>(item, "requestHash"),
            std::nullopt};
    if (item.contains("delivery")) e.delivery = item["delivery"];
    restored.emplace(require_fixed<Digest32>(item, "quoteId"), std::move(e));
  }
  std::lock_guard lock(mutex_);
  entries_ = std::move(restored);
}

void mark_receipt_consumed(ConsumedReceipts& state, const Receipt& receipt, const Quote& quote) {
  state.mark_consumed(quote_id(quote), receipt, quote.request_hash);
}

}  // namespace agentosi
