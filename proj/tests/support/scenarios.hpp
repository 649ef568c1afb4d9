#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "agentosi/session.hpp"

namespace agentosi::testing {

// ---- single-session adversarial cases ------------------------------------

struct SafetyResult {
  std::string name;
  std::string state;
  std::string expected;
  bool tokens_ok = false;
  bool ok() const { return state == expected && tokens_ok; }
};

inline std::vector<TxReceipt> receipts_of(const Simulation& sim, TxKind kind) {
  std::vector<TxReceipt> out;
  for (const auto& r : sim.ledger().all_receipts()) {
    if (r.kind == kind) out.push_back(r);
  }
  return out;
}

// Payer made whole, payee unpaid, nothing locked, no release succeeded.
inline bool untouched(const Simulation& sim, const SessionTranscript& t, Amount ua_start) {
  const auto& l = sim.ledger();
  for (const auto& r : receipts_of(sim, TxKind::EscrowRelease)) {
    if (r.success()) return false;
  }
  return l.balance(t.user) == ua_start && l.balance(t.service) == Amount{} && l.total_locked() == Amount{} &&
         l.total_balances() == l.genesis_supply();
}

// Payer charged exactly once and payee paid exactly once.
inline bool paid_once(const Simulation& sim, const SessionTranscript& t, Amount ua_start) {
  const auto& l = sim.ledger();
  const Amount price = t.quote->price;
  int released = 0;
  for (const auto& r : receipts_of(sim, TxKind::EscrowRelease)) released += r.success() ? 1 : 0;
  return released == 1 && l.balance(t.user) == ua_start - price && l.balance(t.service) == price &&
         l.total_balances() + l.total_locked() == l.genesis_supply();
}

inline SafetyResult single_case(const std::string& name, SessionHooks hooks, const std::string& expected,
                                WorkloadKind kind = WorkloadKind::Light) {
  RunConfig c;
  auto sim = simulate_session(c, kind, SessionMode::AgentOsi, 17, std::move(hooks));
  const auto& t = sim->transcript(0);
  return {name, t.state.str(), expected, untouched(*sim, t, c.ua_balance)};
}

inline std::vector<SafetyResult> run_safety_suite() {
  std::vector<SafetyResult> out;
  RunConfig c;

  {
    Simulation sim(c, 5);
    const auto sa = sim.add_service(c.light, 1);
    const auto ua = sim.add_user(2, c.ua_balance);
    const auto other = sim.add_user(3, c.ua_balance);
    sim.register_all();
    sim.start_session(ua, sa, sim.now());
    sim.run();
    const Amount sa_paid = sim.ledger().balance(sa);
    SessionHooks h;
    h.replay_receipt = *sim.transcript(0).receipt;
    sim.start_session(ua, sa, sim.now(), h);
    sim.start_session(other, sa, sim.now() + 1, h);
    sim.run();
    const bool tokens = sim.ledger().balance(sa) == sa_paid && sim.ledger().balance(other) == c.ua_balance &&
                        receipts_of(sim, TxKind::EscrowRelease).size() == 1;
    for (std::size_t i : {1u, 2u}) {
      out.push_back({"receipt replay across sessions (" + std::to_string(i) + ")", sim.transcript(i).state.str(),
                     "Failed(AlreadyConsumed)", tokens});
    }
  }

  SessionHooks h;
  h.tamper_receipt = [](Receipt& r) { r.event.quote_id.raw()[3] ^= 0x40; };
  out.push_back(single_case("quote_id mutation", h, "Failed(BindingMismatch)"));
  h = {};
  h.tamper_receipt = [](Receipt& r) { r.event.request_hash.raw()[0] ^= 1; };
  out.push_back(single_case("request_hash mutation", h, "Failed(BindingMismatch)"));
  h = {};
  h.tamper_receipt = [](Receipt& r) { r.event.payer = AgentIdentity::from_seed(999).address(); };
  out.push_back(single_case("payer mutation", h, "Failed(PayerMismatch)"));
  h = {};
  h.tamper_receipt = [](Receipt& r) { r.event.payee = AgentIdentity::from_seed(999).address(); };
  out.push_back(single_case("payee mutation", h, "Failed(PayeeMismatch)"));
  h = {};
  h.tamper_receipt = [](Receipt& r) { r.event.amount = r.event.amount - Amount::from_micros(1); };
  out.push_back(single_case("amount mutation", h, "Failed(AmountMismatch)"));
  h = {};
  h.pay_delay_ms = c.quote_ttl_ms + 1;
  h.skip_quote_checks = true;
  out.push_back(single_case("expired quote payment", h, "Failed(QuoteExpired)"));
  h = {};
  h.tamper_quote = [](Quote& q) { q.price = q.price - Amount::from_micros(5'000); };
  out.push_back(single_case("tampered quote signature", h, "Failed(SignerMismatch)"));

  {
    SessionHooks m;
    m.mutate_delivery = [](Bytes& b) { b[b.size() / 2] ^= 0x10; };
    auto sim = simulate_session(c, WorkloadKind::GenAI, SessionMode::AgentOsi, 17, m);
    const auto& t = sim->transcript(0);
    out.push_back({"mutated delivery bytes", t.state.str(), "Failed(CidMismatch)", paid_once(*sim, t, c.ua_balance)});
  }
  {
    SessionHooks d;
    d.double_release = true;
    auto sim = simulate_session(c, WorkloadKind::Light, SessionMode::AgentOsi, 17, d);
    const auto& t = sim->transcript(0);
    std::string dup = "none";
    for (const auto& r : receipts_of(*sim, TxKind::EscrowRelease)) {
      if (!r.success()) dup = std::string(revert_reason_name(r.revert_reason));
    }
    out.push_back({"double release", dup, "NotLocked", paid_once(*sim, t, c.ua_balance)});
  }
  {
    SessionHooks e;
    e.early_refund = true;
    auto sim = simulate_session(c, WorkloadKind::Light, SessionMode::AgentOsi, 17, e);
    const auto& t = sim->transcript(0);
    std::string refund = "none";
    for (const auto& r : receipts_of(*sim, TxKind::EscrowRefund)) {
      refund = r.success() ? "Refunded" : std::string(revert_reason_name(r.revert_reason));
    }
    out.push_back({"pre-expiry refund", refund, "NotExpired", paid_once(*sim, t, c.ua_balance)});
  }
  return out;
}

// ---- mixed load ----------------------------------------------------------

struct MixedLoadResult {
  std::size_t sessions = 0;
  std::size_t settled = 0;
  std::size_t failed = 0;
  std::size_t conservation_checks = 0;
  std::size_t conservation_violations = 0;
  std::size_t double_releases = 0;
  std::size_t unsafe_settlements = 0;  // Settled without all three checks
  std::size_t executed_before_accept = 0;
  std::map<std::string, std::size_t> states;
};

// Honest and adversarial sessions interleaved across three services and
// many user agents, with conservation checked every `check_every_ms`.
inline MixedLoadResult run_mixed_load(std::size_t target, std::uint64_t seed,
                                      std::int64_t check_every_ms = 5'000) {
  RunConfig c;
  c.quote_ttl_ms = 20'000;
  Simulation sim(c, seed);
  Rng rng(seed ^ 0x5eed);
  std::vector<Address> services{sim.add_service(c.light, 1), sim.add_service(c.pipeline, 2),
                                sim.add_service(c.genai, 3)};
  std::vector<Address> users;
  for (std::uint64_t i = 0; i < 40; ++i) {
    const Amount balance = i % 10 == 9 ? Amount::from_micros(30'000) : Amount::from_units(50);
    users.push_back(sim.add_user(1000 + i, balance));
  }
  sim.register_all();
  const Amount supply = sim.ledger().genesis_supply();

  std::size_t started = 0;
  std::vector<Receipt> paid;
  auto hooks_for = [&](std::int64_t kind) {
    SessionHooks h;
    switch (kind) {
      case 1: h.tamper_receipt = [](Receipt& r) { r.event.amount = r.event.amount + Amount::from_micros(1); }; break;
      case 2: h.tamper_receipt = [](Receipt& r) { r.event.request_hash.raw()[0] ^= 1; }; break;
      case 3: h.tamper_quote = [](Quote& q) { q.price = q.price + Amount::from_micros(1); }; break;
      case 4: h.mutate_delivery = [](Bytes& b) { b[0] ^= 1; }; break;
      case 5: h.double_release = true; break;
      case 6: h.early_refund = true; break;
      case 7:
        h.pay_delay_ms = c.quote_ttl_ms + 5'000;
        h.skip_quote_checks = true;
        break;
      case 8:
        if (!paid.empty()) h.replay_receipt = paid[rng.uniform_int(0, paid.size() - 1)];
        break;
      case 9: h.tamper_lock = [](LockParams& p) { p.amount = Amount::from_micros(1); }; break;
      case 10: h.tamper_receipt = [](Receipt& r) { r.event.payer.raw()[0] ^= 1; }; break;
      case 11: h.resend_receipt = true; break;
      default: break;
    }
    return h;
  };
  std::function<void(const Address&, std::int64_t)> launch = [&](const Address& ua, std::int64_t at) {
    if (started >= target) return;
    ++started;
    sim.start_session(ua, services[rng.uniform_int(0, 2)], at, hooks_for(rng.uniform_int(0, 16)),
                      [&, ua](std::size_t idx, std::int64_t end) {
                        const auto& t = sim.transcript(idx);
                        if (t.receipt && t.state.settled()) paid.push_back(*t.receipt);
                        launch(ua, end);
                      });
  };
  for (std::size_t i = 0; i < users.size(); ++i) launch(users[i], sim.now() + static_cast<std::int64_t>(i) * 37);

  MixedLoadResult out;
  std::int64_t t = sim.now();
  while (!sim.scheduler().idle()) {
    t += check_every_ms;
    sim.run_until(t);
    ++out.conservation_checks;
    if (sim.ledger().total_balances() + sim.ledger().total_locked() != supply) ++out.conservation_violations;
  }

  std::map<Digest32, int> releases;
  for (const auto& r : sim.ledger().all_receipts()) {
    if (!r.success()) continue;
    for (const auto& ev : r.decode_events()) {
      if (const auto* rel = std::get_if<EscrowReleasedEvent>(&ev)) ++releases[rel->quote_id];
    }
  }
  for (const auto& [q, n] : releases) out.double_releases += n > 1 ? 1 : 0;

  out.sessions = sim.session_count();
  for (const auto* tr : sim.transcripts()) {
    ++out.states[tr->state.phase == SessionPhase::Failed ? tr->state.str() : std::string(session_phase_name(tr->state.phase))];
    for (const auto& [at, phase] : tr->history) {
      if (phase == SessionPhase::Executing && !(tr->receipt_verdict && tr->receipt_verdict->accepted)) {
        ++out.executed_before_accept;
      }
    }
    if (!tr->state.settled()) {
      out.failed += tr->state.phase == SessionPhase::Failed ? 1 : 0;
      continue;
    }
    ++out.settled;
    bool safe = tr->receipt_verdict && tr->receipt_verdict->accepted && tr->provenance_verdict &&
                tr->provenance_verdict->verdict.accepted && tr->provenance && tr->quote && tr->receipt;
    if (safe) {
      const auto e = sim.ledger().escrow(tr->provenance->quote_id);
      safe = e && e->status == EscrowStatus::Released && e->evidence == provenance_hash(*tr->provenance) &&
             tr->quote->request_hash == tr->provenance->request_hash &&
             tr->receipt->event.request_hash == tr->provenance->request_hash &&
             quote_id(*tr->quote) == tr->receipt->event.quote_id &&
             tr->receipt->event.quote_id == tr->provenance->quote_id;
    }
    out.unsafe_settlements += safe ? 0 : 1;
  }
  return out;
}

}  // namespace agentosi::testing
