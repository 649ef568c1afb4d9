#include <gtest/gtest.h>

#include "agentosi/session.hpp"
#include "scenarios.hpp"

using namespace agentosi;

namespace {

struct Outcome {
  std::unique_ptr<Simulation> sim;
  const SessionTranscript* t = nullptr;
  Address ua;
  Address sa;
  Amount ua_start;
};

Outcome run(SessionHooks hooks, WorkloadKind kind = WorkloadKind::Light) {
  RunConfig c;
  Outcome o;
  o.sim = simulate_session(c, kind, SessionMode::AgentOsi, 17, std::move(hooks));
  o.t = &o.sim->transcript(0);
  o.ua = o.t->user;
  o.sa = o.t->service;
  o.ua_start = c.ua_balance;
  return o;
}

std::vector<TxReceipt> receipts_of(const Simulation& sim, TxKind kind) {
  std::vector<TxReceipt> out;
  for (const auto& r : sim.ledger().all_receipts()) {
    if (r.kind == kind) out.push_back(r);
  }
  return out;
}

// Failed session: no release, payer made whole, payee unpaid, supply intact.
void expect_rejected(const Outcome& o, const std::string& state) {
  EXPECT_EQ(o.t->state.str(), state);
  const auto& ledger = o.sim->ledger();
  EXPECT_EQ(ledger.balance(o.ua), o.ua_start);
  EXPECT_EQ(ledger.balance(o.sa), Amount{});
  EXPECT_EQ(ledger.total_locked(), Amount{});
  EXPECT_EQ(ledger.total_balances(), ledger.genesis_supply());
  for (const auto& r : receipts_of(*o.sim, TxKind::EscrowRelease)) EXPECT_FALSE(r.success());
}

}  // namespace

TEST(Safety, HonestBaseline) {
  const auto o = run({});
  EXPECT_EQ(o.t->state.str(), "Settled");
  EXPECT_EQ(o.sim->ledger().balance(o.sa), Amount::from_micros(10'000));
}

TEST(Safety, ReceiptReplayAcrossSessions) {
  RunConfig c;
  Simulation sim(c, 5);
  const auto sa = sim.add_service(c.light, 1);
  const auto ua = sim.add_user(2, c.ua_balance);
  const auto mallory = sim.add_user(3, c.ua_balance);
  sim.register_all();
  sim.start_session(ua, sa, sim.now());
  sim.run();
  ASSERT_TRUE(sim.transcript(0).state.settled());
  const Receipt paid = *sim.transcript(0).receipt;
  const Amount sa_after_first = sim.ledger().balance(sa);

  SessionHooks same;
  same.replay_receipt = paid;
  sim.start_session(ua, sa, sim.now(), same);
  SessionHooks other;
  other.replay_receipt = paid;
  sim.start_session(mallory, sa, sim.now() + 1, other);
  sim.run();
  for (std::size_t i : {1u, 2u}) {
    const auto& t = sim.transcript(i);
    EXPECT_EQ(t.state.str(), "Failed(AlreadyConsumed)");
    ASSERT_TRUE(t.receipt_verdict.has_value());
    EXPECT_EQ(t.receipt_verdict->reason, RejectReason::AlreadyConsumed);
  }
  EXPECT_EQ(sim.ledger().balance(sa), sa_after_first);
  EXPECT_EQ(sim.ledger().balance(mallory), c.ua_balance);
  EXPECT_EQ(receipts_of(sim, TxKind::EscrowRelease).size(), 1u);
}

TEST(Safety, QuoteIdMutation) {
  SessionHooks h;
  h.tamper_receipt = [](Receipt& r) { r.event.quote_id.raw()[3] ^= 0x40; };
  const auto o = run(h);
  expect_rejected(o, "Failed(BindingMismatch)");
  EXPECT_EQ(o.t->receipt_verdict->reason, RejectReason::BindingMismatch);
}

TEST(Safety, RequestHashMutation) {
  SessionHooks h;
  h.tamper_receipt = [](Receipt& r) { r.event.request_hash.raw()[0] ^= 1; };
  expect_rejected(run(h), "Failed(BindingMismatch)");
}

TEST(Safety, PayerMutation) {
  SessionHooks h;
  h.tamper_receipt = [](Receipt& r) { r.event.payer = AgentIdentity::from_seed(999).address(); };
  expect_rejected(run(h), "Failed(PayerMismatch)");
}

TEST(Safety, PayeeMutation) {
  SessionHooks h;
  h.tamper_receipt = [](Receipt& r) { r.event.payee = AgentIdentity::from_seed(999).address(); };
  expect_rejected(run(h), "Failed(PayeeMismatch)");
}

TEST(Safety, AmountMutation) {
  SessionHooks h;
  h.tamper_receipt = [](Receipt& r) { r.event.amount = r.event.amount - Amount::from_micros(1); };
  expect_rejected(run(h), "Failed(AmountMismatch)");
}

TEST(Safety, UnderpaidLock) {
  SessionHooks h;
  h.tamper_lock = [](LockParams& p) { p.amount = Amount::from_micros(1); };
  const auto o = run(h);
  expect_rejected(o, "Failed(AmountMismatch)");
  EXPECT_EQ(receipts_of(*o.sim, TxKind::EscrowRefund).size(), 1u);
}

TEST(Safety, LockToWrongPayee) {
  SessionHooks h;
  h.tamper_lock = [](LockParams& p) { p.payee = AgentIdentity::from_seed(998).address(); };
  expect_rejected(run(h), "Failed(PayeeMismatch)");
}

TEST(Safety, LockBoundToOtherRequest) {
  SessionHooks h;
  h.tamper_lock = [](LockParams& p) { p.request_hash.raw()[5] ^= 1; };
  expect_rejected(run(h), "Failed(BindingMismatch)");
}

TEST(Safety, ExpiredQuotePayment) {
  RunConfig c;
  SessionHooks h;
  h.pay_delay_ms = c.quote_ttl_ms + 1;
  const auto checked = run(h);
  expect_rejected(checked, "Failed(QuoteExpired)");
  EXPECT_TRUE(receipts_of(*checked.sim, TxKind::EscrowLock).empty());

  h.skip_quote_checks = true;
  const auto forced = run(h);
  expect_rejected(forced, "Failed(QuoteExpired)");
  const auto locks = receipts_of(*forced.sim, TxKind::EscrowLock);
  ASSERT_EQ(locks.size(), 1u);
  EXPECT_EQ(locks[0].revert_reason, RevertReason::QuoteExpired);
}

TEST(Safety, TamperedQuoteSignature) {
  SessionHooks h;
  h.tamper_quote = [](Quote& q) { q.price = q.price - Amount::from_micros(5'000); };
  const auto o = run(h);
  expect_rejected(o, "Failed(SignerMismatch)");
  EXPECT_TRUE(receipts_of(*o.sim, TxKind::EscrowLock).empty());

  SessionHooks forged;
  forged.tamper_quote = [](Quote& q) {
    const auto impostor = AgentIdentity::from_seed(4242);
    q.signature = impostor.sign(canonicalize(q.unsigned_json()));
  };
  expect_rejected(run(forged), "Failed(SignerMismatch)");
}

TEST(Safety, MutatedDelivery) {
  for (auto kind : {WorkloadKind::Light, WorkloadKind::GenAI}) {
    SessionHooks h;
    h.mutate_delivery = [](Bytes& b) { b[b.size() / 2] ^= 0x10; };
    const auto o = run(h, kind);
    EXPECT_EQ(o.t->state.str(), "Failed(CidMismatch)");
    ASSERT_TRUE(o.t->provenance_verdict.has_value());
    EXPECT_EQ(o.t->provenance_verdict->verdict.reason, RejectReason::CidMismatch);
    // The service delivered honestly; its release is the only token movement.
    const auto& ledger = o.sim->ledger();
    const auto price = o.t->quote->price;
    EXPECT_EQ(ledger.balance(o.ua), o.ua_start - price);
    EXPECT_EQ(ledger.balance(o.sa), price);
    EXPECT_EQ(ledger.total_balances() + ledger.total_locked(), ledger.genesis_supply());
  }
}

TEST(Safety, DoubleRelease) {
  SessionHooks h;
  h.double_release = true;
  const auto o = run(h);
  const auto releases = receipts_of(*o.sim, TxKind::EscrowRelease);
  ASSERT_EQ(releases.size(), 2u);
  EXPECT_EQ(std::count_if(releases.begin(), releases.end(), [](const TxReceipt& r) { return r.success(); }), 1);
  const auto dup = std::find_if(releases.begin(), releases.end(), [](const TxReceipt& r) { return !r.success(); });
  EXPECT_EQ(dup->revert_reason, RevertReason::NotLocked);
  EXPECT_EQ(o.sim->ledger().balance(o.sa), o.t->quote->price);
  EXPECT_EQ(o.sim->ledger().balance(o.ua), o.ua_start - o.t->quote->price);
}

TEST(Safety, PreExpiryRefund) {
  SessionHooks h;
  h.early_refund = true;
  const auto o = run(h);
  const auto refunds = receipts_of(*o.sim, TxKind::EscrowRefund);
  ASSERT_EQ(refunds.size(), 1u);
  EXPECT_FALSE(refunds[0].success());
  EXPECT_EQ(refunds[0].revert_reason, RevertReason::NotExpired);
  EXPECT_EQ(o.sim->ledger().balance(o.ua), o.ua_start - o.t->quote->price);
  EXPECT_EQ(o.sim->ledger().balance(o.sa), o.t->quote->price);
}

TEST(Safety, ByteIdenticalRetryServedFromCache) {
  SessionHooks h;
  h.resend_receipt = true;
  const auto o = run(h, WorkloadKind::PipelineK);
  EXPECT_TRUE(o.t->state.settled());
  EXPECT_EQ(receipts_of(*o.sim, TxKind::EscrowRelease).size(), 1u);
  EXPECT_EQ(o.sim->ledger().balance(o.sa), o.t->quote->price);
  std::size_t executing = 0;
  for (const auto& [at, p] : o.t->history) executing += p == SessionPhase::Executing ? 1 : 0;
  EXPECT_EQ(executing, 1u);
}

TEST(Safety, NoSettleWithoutAllThreeChecks) {
  std::vector<SessionHooks> attacks(6);
  attacks[0].tamper_receipt = [](Receipt& r) { r.tx_hash.raw()[0] ^= 1; };
  attacks[1].tamper_quote = [](Quote& q) { q.expiry_ms += 1; };
  attacks[2].mutate_delivery = [](Bytes& b) { b.push_back(0); };
  attacks[3].tamper_lock = [](LockParams& p) { p.quote_id.raw()[0] ^= 1; };
  attacks[4].tamper_receipt = [](Receipt& r) { r.block_number += 1; };
  attacks[5].skip_quote_checks = true;
  attacks[5].tamper_quote = [](Quote& q) { q.payee = AgentIdentity::from_seed(77).address(); };
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    const auto o = run(attacks[i]);
    EXPECT_FALSE(o.t->state.settled()) << "attack " << i;
    EXPECT_EQ(o.sim->ledger().total_balances() + o.sim->ledger().total_locked(),
              o.sim->ledger().genesis_supply());
  }
}

TEST(Safety, SuiteDriversAllRejected) {
  for (const auto& r : agentosi::testing::run_safety_suite()) {
    EXPECT_TRUE(r.ok()) << r.name << ": " << r.state << " expected " << r.expected;
  }
}
