#include <gtest/gtest.h>

#include "agentosi/error.hpp"
#include "agentosi/ledger.hpp"

using namespace agentosi;

namespace {

struct LedgerFixture : ::testing::Test {
  AgentIdentity payer = AgentIdentity::from_seed(201);
  AgentIdentity payee = AgentIdentity::from_seed(202);
  AgentIdentity other = AgentIdentity::from_seed(203);
  std::unique_ptr<Ledger> ledger;
  Digest32 qid = sha256(std::string_view("quote-1"));
  Digest32 rh = sha256(std::string_view("request-1"));
  Digest32 evidence = sha256(std::string_view("provenance"));
  std::int64_t now = 0;

  void SetUp() override {
    LedgerConfig c;
    ledger = std::make_unique<Ledger>(c);
    ledger->add_genesis_balance(payer.address(), Amount::from_units(10));
    for (const auto* id : {&payer, &payee, &other}) {
      const auto r = ledger->register_identity(*id, now);
      ASSERT_TRUE(r.success());
      now = r.block_timestamp_ms;
    }
  }

  TxReceipt lock(Amount amount = Amount::from_micros(10'000), std::int64_t expiry = 100'000) {
    auto r = ledger->lock_escrow(payer, qid, rh, payee.address(), amount, expiry, now);
    now = r.block_timestamp_ms;
    return r;
  }

  TxReceipt release(const AgentIdentity& sender, const Digest32& ev) {
    auto r = ledger->release_escrow(sender, qid, ev, now);
    now = r.block_timestamp_ms;
    return r;
  }

  TxReceipt refund(const AgentIdentity& sender) {
    auto r = ledger->refund_escrow(sender, qid, now);
    now = r.block_timestamp_ms;
    return r;
  }
};

}  // namespace

TEST_F(LedgerFixture, RegistrationGasAndEvent) {
  const auto receipts = ledger->all_receipts();
  ASSERT_EQ(receipts.size(), 3u);
  for (const auto& r : receipts) {
    EXPECT_EQ(r.gas_used, 46'000u);
    ASSERT_EQ(r.decode_events().size(), 1u);
    EXPECT_TRUE(std::holds_alternative<IdentityRegisteredEvent>(r.decode_events()[0]));
  }
  EXPECT_TRUE(ledger->is_registered(payer.address()));
  EXPECT_EQ(ledger->registered_key(payer.address()), payer.public_key());
}

TEST_F(LedgerFixture, DuplicateRegistrationReverts) {
  const auto r = ledger->register_identity(payer, now);
  EXPECT_FALSE(r.success());
  EXPECT_EQ(r.revert_reason, RevertReason::AlreadyRegistered);
}

TEST_F(LedgerFixture, LockReleaseMovesFunds) {
  const auto l = lock();
  ASSERT_TRUE(l.success());
  EXPECT_EQ(l.gas_used, 95'000u);
  EXPECT_EQ(ledger->balance(payer.address()), Amount::from_micros(9'990'000));
  EXPECT_EQ(ledger->total_locked(), Amount::from_micros(10'000));
  const auto r = ledger->release_escrow(payee, qid, evidence, now);
  ASSERT_TRUE(r.success());
  EXPECT_EQ(r.gas_used, 64'000u);
  EXPECT_EQ(ledger->balance(payee.address()), Amount::from_micros(10'000));
  const auto e = ledger->escrow(qid);
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->status, EscrowStatus::Released);
  EXPECT_EQ(e->evidence, evidence);
  EXPECT_EQ(ledger->total_balances() + ledger->total_locked(), ledger->genesis_supply());
}

TEST_F(LedgerFixture, LockedEventDecodes) {
  const auto l = lock();
  const auto events = l.decode_events();
  ASSERT_EQ(events.size(), 1u);
  const auto& ev = std::get<EscrowLockedEvent>(events[0]);
  EXPECT_EQ(ev.quote_id, qid);
  EXPECT_EQ(ev.request_hash, rh);
  EXPECT_EQ(ev.payer, payer.address());
  EXPECT_EQ(ev.payee, payee.address());
  EXPECT_EQ(ev.amount, Amount::from_micros(10'000));
  EXPECT_EQ(decode_event(encode_event(ev)), LedgerEvent(ev));
}

TEST_F(LedgerFixture, RevertCases) {
  EXPECT_EQ(lock(Amount::from_micros(0)).revert_reason, RevertReason::InvalidAmount);
  EXPECT_EQ(lock(Amount::from_units(11)).revert_reason, RevertReason::InsufficientBalance);
  EXPECT_EQ(lock(Amount::from_micros(1), 1).revert_reason, RevertReason::QuoteExpired);
  ASSERT_TRUE(lock().success());
  EXPECT_EQ(lock().revert_reason, RevertReason::DuplicateQuoteId);
  EXPECT_EQ(release(other, evidence).revert_reason, RevertReason::NotPayee);
  EXPECT_EQ(release(payee, Digest32{}).revert_reason, RevertReason::ZeroEvidence);
  EXPECT_EQ(refund(payer).revert_reason, RevertReason::NotExpired);
  EXPECT_EQ(refund(other).revert_reason, RevertReason::NotPayer);
  ASSERT_TRUE(release(payee, evidence).success());
  EXPECT_EQ(release(payee, evidence).revert_reason, RevertReason::NotLocked);
  EXPECT_EQ(ledger->balance(payee.address()), Amount::from_micros(10'000));
}

TEST_F(LedgerFixture, RefundAfterExpiry) {
  ASSERT_TRUE(lock(Amount::from_micros(500), now + 5'000).success());
  const auto r = ledger->refund_escrow(payer, qid, now + 5'000);
  ASSERT_TRUE(r.success());
  EXPECT_EQ(ledger->balance(payer.address()), Amount::from_units(10));
  EXPECT_EQ(ledger->escrow(qid)->status, EscrowStatus::Refunded);
  EXPECT_EQ(ledger->release_escrow(payee, qid, evidence, r.block_timestamp_ms).revert_reason,
            RevertReason::NotLocked);
}

TEST_F(LedgerFixture, UnregisteredSenderReverts) {
  const auto stranger = AgentIdentity::from_seed(299);
  const auto tx = ledger->anchor_tx(TxKind::AnchorOrder, stranger.address(), rh);
  const auto r = ledger->submit_and_confirm(tx, now);
  EXPECT_EQ(r.revert_reason, RevertReason::UnregisteredSender);
}

TEST_F(LedgerFixture, AnchorsCostGas) {
  const auto r = ledger->submit_and_confirm(ledger->anchor_tx(TxKind::AnchorOrder, payer.address(), rh), now);
  EXPECT_TRUE(r.success());
  EXPECT_EQ(r.gas_used, 90'000u);
  const auto d = ledger->submit_and_confirm(
      ledger->anchor_tx(TxKind::AnchorDelivery, payee.address(), rh), r.block_timestamp_ms);
  EXPECT_EQ(d.gas_used, 77'000u);
}

TEST(LedgerBlocks, InclusionInNextBlock) {
  Ledger ledger(LedgerConfig{});
  const auto a = AgentIdentity::from_seed(1);
  const auto p = ledger.submit(ledger.register_identity_tx(a), 2'500);
  EXPECT_EQ(p.earliest_block_ms, 4'000);
  EXPECT_EQ(ledger.next_pending_block_ms(), 4'000);
  EXPECT_TRUE(ledger.produce_blocks_until(3'999).empty());
  const auto r = ledger.produce_blocks_until(4'000);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].confirmation_wait_ms(), 1'500);
  EXPECT_EQ(ledger.next_block_after(4'000), 6'000);
  EXPECT_THROW(ledger.submit(ledger.register_identity_tx(AgentIdentity::from_seed(2)), 3'000), Error);
}

TEST(LedgerBlocks, PerBlockCapDefersOverflow) {
  LedgerConfig c;
  c.max_tx_per_block = 2;
  Ledger ledger(c);
  for (std::uint64_t s = 1; s <= 5; ++s) ledger.submit(ledger.register_identity_tx(AgentIdentity::from_seed(s)), 0);
  const auto r = ledger.produce_blocks_until(10'000);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_EQ(r[0].block_timestamp_ms, 2'000);
  EXPECT_EQ(r[1].block_timestamp_ms, 2'000);
  EXPECT_EQ(r[2].block_timestamp_ms, 4'000);
  EXPECT_EQ(r[4].block_timestamp_ms, 6'000);
}

TEST(LedgerBlocks, GenesisOnlyBeforeFirstBlock) {
  Ledger ledger(LedgerConfig{});
  ledger.submit_and_confirm(ledger.register_identity_tx(AgentIdentity::from_seed(1)), 0);
  EXPECT_THROW(ledger.add_genesis_balance(AgentIdentity::from_seed(1).address(), Amount::from_units(1)),
               Error);
}

TEST(LedgerLog, ReceiptJsonRoundTrip) {
  Ledger ledger(LedgerConfig{});
  const auto r = ledger.submit_and_confirm(ledger.register_identity_tx(AgentIdentity::from_seed(1)), 0);
  const auto back = TxReceipt::from_json(r.to_json());
  EXPECT_EQ(canonicalize(back.to_json()), canonicalize(r.to_json()));
  EXPECT_EQ(ledger.find_receipt(r.tx_hash)->tx_hash, r.tx_hash);
  EXPECT_FALSE(ledger.find_receipt(Digest32{}).has_value());
  EXPECT_EQ(ledger.export_log_jsonl(), canonicalize(r.to_json()) + "\n");
}

TEST(GasSchedule, ScaledHalves) {
  const auto g = GasSchedule{}.scaled(0.5);
  EXPECT_EQ(g.of(TxKind::RegisterIdentity), 23'000u);
  EXPECT_EQ(g.of(TxKind::EscrowLock), 47'500u);
}
