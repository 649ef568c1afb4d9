#include <gtest/gtest.h>

#include "agentosi/session.hpp"

using namespace agentosi;

namespace {

std::vector<SessionPhase> phases(const SessionTranscript& t) {
  std::vector<SessionPhase> out;
  for (const auto& [at, p] : t.history) out.push_back(p);
  return out;
}

}  // namespace

TEST(SessionPhase, LegalTransitions) {
  EXPECT_TRUE(legal_transition(SessionPhase::Discovery, SessionPhase::Quoted));
  EXPECT_TRUE(legal_transition(SessionPhase::Delivering, SessionPhase::Settled));
  EXPECT_TRUE(legal_transition(SessionPhase::Paying, SessionPhase::Failed));
  EXPECT_FALSE(legal_transition(SessionPhase::Discovery, SessionPhase::Settled));
  EXPECT_FALSE(legal_transition(SessionPhase::Settled, SessionPhase::Failed));
  EXPECT_FALSE(legal_transition(SessionPhase::Failed, SessionPhase::Quoted));
}

TEST(SessionState, Str) {
  EXPECT_EQ((SessionState{SessionPhase::Settled, std::nullopt}.str()), "Settled");
  EXPECT_EQ((SessionState{SessionPhase::Failed, FailureReason::Timeout}.str()), "Failed(Timeout)");
  EXPECT_EQ(parse_failure_reason("CidMismatch"), FailureReason::CidMismatch);
  EXPECT_EQ(failure_from(RejectReason::PayerMismatch), FailureReason::PayerMismatch);
}

TEST(Session, LightSettles) {
  RunConfig c;
  const auto t = run_session(c, WorkloadKind::Light, SessionMode::AgentOsi, 1);
  ASSERT_TRUE(t.state.settled()) << t.state.str();
  EXPECT_EQ(phases(t), (std::vector<SessionPhase>{SessionPhase::Discovery, SessionPhase::Quoted,
                                                  SessionPhase::Paying, SessionPhase::VerifyingReceipt,
                                                  SessionPhase::Executing, SessionPhase::Delivering,
                                                  SessionPhase::Settled}));
  EXPECT_EQ(t.gas_total(), 159'000u);
  ASSERT_TRUE(t.provenance.has_value());
  EXPECT_EQ(t.release_evidence, provenance_hash(*t.provenance));
  EXPECT_TRUE(t.receipt_verdict->accepted);
  EXPECT_TRUE(t.provenance_verdict->verdict.accepted);
  EXPECT_TRUE(t.inline_result.has_value());
  EXPECT_EQ(t.timings.messaging_ms + t.timings.confirmation_ms + t.timings.execution_delivery_ms,
            t.timings.total_ms);
  EXPECT_LE(t.timings.confirmation_ms, 2'000);
  EXPECT_GT(t.timings.confirmation_share(), 0.5);
}

TEST(Session, BaselineCostsMore) {
  RunConfig c;
  const auto t = run_session(c, WorkloadKind::Light, SessionMode::Web3Baseline, 1);
  ASSERT_TRUE(t.state.settled()) << t.state.str();
  EXPECT_EQ(t.gas_total(), 326'000u);
}

TEST(Session, GenAiTimings) {
  RunConfig c;
  const auto t = run_session(c, WorkloadKind::GenAI, SessionMode::AgentOsi, 3);
  ASSERT_TRUE(t.state.settled()) << t.state.str();
  EXPECT_EQ(t.timings.execution_delivery_ms, 4'177);
  EXPECT_GE(t.serial.total_ms, t.overlapped.total_ms);
  EXPECT_EQ(t.delivered.size(), 262'144u);
  EXPECT_EQ(Cid::of(t.delivered), *t.output_cid);
}

TEST(Session, DeterministicUnderSeed) {
  RunConfig c;
  const auto a = run_session(c, WorkloadKind::PipelineK, SessionMode::AgentOsi, 5);
  const auto b = run_session(c, WorkloadKind::PipelineK, SessionMode::AgentOsi, 5);
  EXPECT_EQ(canonicalize(a.to_json()), canonicalize(b.to_json()));
  const auto d = run_session(c, WorkloadKind::PipelineK, SessionMode::AgentOsi, 6);
  EXPECT_NE(canonicalize(a.to_json()), canonicalize(d.to_json()));
}

TEST(Session, InsufficientBalanceFails) {
  RunConfig c;
  c.ua_balance = Amount::from_micros(1);
  const auto t = run_session(c, WorkloadKind::Light, SessionMode::AgentOsi, 1);
  EXPECT_EQ(t.state.str(), "Failed(InsufficientBalance)");
}

TEST(Session, SerialAttributionChangesEnd) {
  RunConfig c;
  c.attribution = ReleaseAttribution::Serial;
  const auto t = run_session(c, WorkloadKind::Light, SessionMode::AgentOsi, 1);
  ASSERT_TRUE(t.state.settled());
  EXPECT_EQ(t.attribution, ReleaseAttribution::Serial);
  EXPECT_EQ(t.timings.total_ms, t.serial.total_ms);
  EXPECT_EQ(t.end_ms - t.start_ms, t.serial.total_ms);
}

TEST(Simulation, ManySessionsShareOneService) {
  RunConfig c;
  Simulation sim(c, 77);
  const auto sa = sim.add_service(c.light, 1);
  std::vector<Address> uas;
  for (std::uint64_t i = 0; i < 20; ++i) uas.push_back(sim.add_user(100 + i, c.ua_balance));
  sim.register_all();
  for (std::size_t i = 0; i < uas.size(); ++i) sim.start_session(uas[i], sa, sim.now() + static_cast<std::int64_t>(i) * 50);
  sim.run();
  ASSERT_EQ(sim.session_count(), 20u);
  for (const auto* t : sim.transcripts()) EXPECT_TRUE(t->state.settled()) << t->state.str();
  EXPECT_EQ(sim.ledger().total_balances() + sim.ledger().total_locked(), sim.ledger().genesis_supply());
  EXPECT_EQ(sim.ledger().balance(sa), Amount::from_micros(20 * 10'000));
}
