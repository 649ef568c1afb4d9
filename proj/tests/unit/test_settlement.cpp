#include <gtest/gtest.h>

#include "agentosi/error.hpp"
#include "agentosi/settlement.hpp"
#include "agentosi/workload.hpp"

using namespace agentosi;

namespace {

struct SettlementFixture : ::testing::Test {
  AgentIdentity sa = AgentIdentity::from_seed(401);
  AgentIdentity ua = AgentIdentity::from_seed(402);
  AgentIdentity other = AgentIdentity::from_seed(403);
  Ledger ledger{LedgerConfig{}};
  Rng rng{7};
  CapabilityManifest manifest = workload_manifest(default_workload(WorkloadKind::Light), sa);
  ServiceRequest request;
  Digest32 rh;
  Quote quote;
  std::int64_t now = 0;

  void SetUp() override {
    ledger.add_genesis_balance(ua.address(), Amount::from_units(1));
    ledger.add_genesis_balance(other.address(), Amount::from_units(1));
    for (const auto* id : {&sa, &ua, &other}) now = ledger.register_identity(*id, now).block_timestamp_ms;
    request.service_id = manifest.service_id;
    request.params = Json{{"prompt", "hi"}};
    request.requester = ua.address();
    rh = compute_request_hash(manifest, request);
    quote = issue_quote(sa, rh, manifest, request, now, 120'000, rng, 31337, "escrow:agentosi-v1").quote;
  }

  Receipt pay() {
    auto r = pay_quote(ua, ledger, quote, now);
    now = ledger.last_block_ms();
    return r;
  }
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST_F(SettlementFixture, QuoteFields) {
  EXPECT_TRUE(quote.signature_valid());
  EXPECT_EQ(quote.payee, sa.address());
  EXPECT_EQ(quote.price, Amount::from_micros(10'000));
  EXPECT_EQ(quote.request_hash, rh);
  EXPECT_EQ(quote.expiry_ms, now + 120'000);
  EXPECT_EQ(quote.chain_id, 31337u);
  EXPECT_EQ(Quote::from_json(quote.to_json()), quote);
  const PaymentChallenge ch{quote};
  EXPECT_EQ(ch.to_json().at("statusCode"), 402);
  EXPECT_EQ(PaymentChallenge::from_json(ch.to_json()).quote, quote);
}

TEST_F(SettlementFixture, IssueRejectsForeignHash) {
  EXPECT_EQ(code_of([&] {
              issue_quote(sa, sha256(std::string_view("x")), manifest, request, now, 1, rng, 1, "e");
            }),
            Errc::BindingMismatch);
}

TEST_F(SettlementFixture, QuoteIdDependsOnSignatureAndRequest) {
  const auto id = quote_id(quote);
  auto q = quote;
  q.nonce.raw()[0] ^= 1;
  EXPECT_NE(quote_id(q), id);
  EXPECT_EQ(quote_id(Quote::from_json(quote.to_json())), id);
}

TEST_F(SettlementFixture, PayableChecks) {
  EXPECT_NO_THROW(check_quote_payable(quote, now));
  EXPECT_EQ(code_of([&] { check_quote_payable(quote, quote.expiry_ms); }), Errc::QuoteExpired);
  auto q = quote;
  q.price = Amount::from_micros(1);
  EXPECT_EQ(code_of([&] { check_quote_payable(q, now); }), Errc::InvalidQuoteSignature);
}

TEST_F(SettlementFixture, HonestReceiptAccepted) {
  const auto r = pay();
  EXPECT_EQ(r.event.quote_id, quote_id(quote));
  EXPECT_EQ(r.event.amount, quote.price);
  EXPECT_TRUE(verify_receipt(ledger, r, quote, ua.address(), now).accepted);
  EXPECT_EQ(Receipt::from_json(r.to_json()), r);
}

TEST_F(SettlementFixture, ReceiptRejections) {
  const auto r = pay();
  auto expect = [&](Receipt rec, const Quote& q, const Address& payer, RejectReason want) {
    const auto v = verify_receipt(ledger, rec, q, payer, now);
    EXPECT_FALSE(v.accepted);
    ASSERT_TRUE(v.reason.has_value());
    EXPECT_EQ(*v.reason, want) << reject_reason_name(*v.reason);
  };
  auto bad = r;
  bad.tx_hash = sha256(std::string_view("nope"));
  expect(bad, quote, ua.address(), RejectReason::TxNotFound);
  bad = r;
  bad.event.quote_id = sha256(std::string_view("q"));
  expect(bad, quote, ua.address(), RejectReason::BindingMismatch);
  bad = r;
  bad.event.request_hash = sha256(std::string_view("r"));
  expect(bad, quote, ua.address(), RejectReason::BindingMismatch);
  expect(r, quote, other.address(), RejectReason::PayerMismatch);
  bad = r;
  bad.event.payee = other.address();
  expect(bad, quote, ua.address(), RejectReason::PayeeMismatch);
  bad = r;
  bad.event.amount = Amount::from_micros(1);
  expect(bad, quote, ua.address(), RejectReason::AmountMismatch);
  auto q = quote;
  q.receipt_spec.kind = ReceiptSpecKind::ProcessorSigned;
  expect(r, q, ua.address(), RejectReason::UnsupportedReceiptSpec);
  EXPECT_EQ(verify_receipt(ledger, r, quote, ua.address(), now - 1).reason, RejectReason::TxNotFound);
}

TEST_F(SettlementFixture, PayQuoteErrors) {
  auto q = quote;
  q.expiry_ms = now;
  EXPECT_EQ(code_of([&] { pay_quote(ua, ledger, q, now); }), Errc::InvalidQuoteSignature);
  const auto poor = AgentIdentity::from_seed(499);
  ledger.register_identity(poor, now);
  now = ledger.last_block_ms();
  EXPECT_EQ(code_of([&] { pay_quote(poor, ledger, quote, now); }), Errc::InsufficientBalance);
}

TEST_F(SettlementFixture, ConsumedReceiptsReplayGuard) {
  const auto r = pay();
  ConsumedReceipts consumed;
  auto d = consumed.check_and_mark(ledger, r, quote, ua.address(), now);
  EXPECT_EQ(d.outcome, ConsumedReceipts::Outcome::Accepted);
  EXPECT_TRUE(consumed.is_consumed(quote_id(quote)));
  d = consumed.check_and_mark(ledger, r, quote, ua.address(), now);
  EXPECT_EQ(d.outcome, ConsumedReceipts::Outcome::Rejected);
  EXPECT_EQ(d.verdict.reason, RejectReason::AlreadyConsumed);
  consumed.store_delivery(quote_id(quote), Json{{"cid", "x"}});
  d = consumed.check_and_mark(ledger, r, quote, ua.address(), now);
  EXPECT_EQ(d.outcome, ConsumedReceipts::Outcome::CachedRetry);
  EXPECT_EQ(d.cached_delivery, Json({{"cid", "x"}}));
}

TEST_F(SettlementFixture, ReplayAgainstOtherQuote) {
  const auto r = pay();
  ConsumedReceipts consumed;
  ASSERT_EQ(consumed.check_and_mark(ledger, r, quote, ua.address(), now).outcome,
            ConsumedReceipts::Outcome::Accepted);
  const auto q2 = issue_quote(sa, rh, manifest, request, now, 120'000, rng, 31337, "escrow:agentosi-v1").quote;
  const auto d = consumed.check_and_mark(ledger, r, q2, ua.address(), now);
  EXPECT_EQ(d.outcome, ConsumedReceipts::Outcome::Rejected);
  EXPECT_EQ(d.verdict.reason, RejectReason::AlreadyConsumed);
}

TEST_F(SettlementFixture, ConsumedSnapshotRestore) {
  const auto r = pay();
  ConsumedReceipts consumed;
  consumed.check_and_mark(ledger, r, quote, ua.address(), now);
  ConsumedReceipts copy;
  copy.restore(consumed.snapshot());
  EXPECT_EQ(copy.size(), 1u);
  EXPECT_TRUE(copy.is_consumed(quote_id(quote)));
  EXPECT_EQ(copy.snapshot(), consumed.snapshot());
}

TEST(RejectReason, NamesRoundTrip) {
  for (auto r : {RejectReason::BindingMismatch, RejectReason::AmountMismatch, RejectReason::PayerMismatch,
                 RejectReason::PayeeMismatch, RejectReason::QuoteExpired, RejectReason::TxNotFound,
                 RejectReason::AlreadyConsumed, RejectReason::UnsupportedReceiptSpec,
                 RejectReason::SignerMismatch, RejectReason::CidMismatch}) {
    EXPECT_EQ(parse_reject_reason(reject_reason_name(r)), r);
  }
}
