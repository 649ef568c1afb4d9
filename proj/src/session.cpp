#include "agentosi/session.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace agentosi {

namespace {

constexpr std::pair<SessionPhase, std::string_view> kPhaseNames[] = {
    {SessionPhase::Discovery, "Discovery"},
    {SessionPhase::Quoted, "Quoted"},
    {SessionPhase::Paying, "Paying"},
    {SessionPhase::VerifyingReceipt, "VerifyingReceipt"},
    {SessionPhase::Executing, "Executing"},
    {SessionPhase::Delivering, "Delivering"},
    {SessionPhase::Settled, "Settled"},
    {SessionPhase::Failed, "Failed"},
};

constexpr std::pair<FailureReason, std::string_view> kFailureNames[] = {
    {FailureReason::BindingMismatch, "BindingMismatch"},
    {FailureReason::AmountMismatch, "AmountMismatch"},
    {FailureReason::PayerMismatch, "PayerMismatch"},
    {FailureReason::PayeeMismatch, "PayeeMismatch"},
    {FailureReason::QuoteExpired, "QuoteExpired"},
    {FailureReason::TxNotFound, "TxNotFound"},
    {FailureReason::AlreadyConsumed, "AlreadyConsumed"},
    {FailureReason::UnsupportedReceiptSpec, "UnsupportedReceiptSpec"},
    {FailureReason::SignerMismatch, "SignerMismatch"},
    {FailureReason::CidMismatch, "CidMismatch"},
    {FailureReason::Timeout, "Timeout"},
    {FailureReason::InsufficientBalance, "InsufficientBalance"},
    {FailureReason::SchemaViolation, "SchemaViolation"},
    {FailureReason::ServiceNotFound, "ServiceNotFound"},
    {FailureReason::LedgerRevert, "LedgerRevert"},
};

FailureReason failure_from_revert(RevertReason r) {
  switch (r) {
    case RevertReason::QuoteExpired: return FailureReason::QuoteExpired;
    case RevertReason::InsufficientBalance: return FailureReason::InsufficientBalance;
    default: return FailureReason::LedgerRevert;
  }
}

}  // namespace

std::string_view session_phase_name(SessionPhase p) {
  for (const auto& [k, n] : kPhaseNames) {
    if (k == p) return n;
  }
  return "Failed";
}

bool legal_transition(SessionPhase from, SessionPhase to) {
  if (from == SessionPhase::Settled || from == SessionPhase::Failed) return false;
  if (to == SessionPhase::Failed) return true;
  return static_cast<int>(to) == static_cast<int>(from) + 1;
}

std::string_view failure_reason_name(FailureReason r) {
  for (const auto& [k, n] : kFailureNames) {
    if (k == r) return n;
  }
  return "LedgerRevert";
}

FailureReason parse_failure_reason(std::string_view name) {
  for (const auto& [k, n] : kFailureNames) {
    if (n == name) return k;
  }
  throw Error(Errc::MalformedObject, "unknown failure reason '" + std::string(name) + "'");
}

FailureReason failure_from(RejectReason r) {
  return parse_failure_reason(reject_reason_name(r));
}

std::string SessionState::str() const {
  if (phase == SessionPhase::Failed && failure) {
    return "Failed(" + std::string(failure_reason_name(*failure)) + ")";
  }
  return std::string(session_phase_name(phase));
}

double PhaseTimings::confirmation_share() const {
  return total_ms > 0 ? static_cast<double>(confirmation_ms) / static_cast<double>(total_ms) : 0.0;
}

Json PhaseTimings::to_json() const {
  return Json{{"messagingMs", messaging_ms},
              {"confirmationMs", confirmation_ms},
              {"executionDeliveryMs", execution_delivery_ms},
              {"totalMs", total_ms}};
}

Json SessionTranscript::to_json() const {
  Json receipts = Json::array();
  for (const auto& r : gas_receipts) receipts.push_back(r.to_json());
  Json artifacts = Json::object();
  if (request) artifacts["request"] = request->to_json();
  if (request_hash) artifacts["requestHash"] = request_hash->hex();
  if (quote) {
    artifacts["quote"] = quote->to_json();
    artifacts["quoteId"] = quote_id(*quote).hex();
  }
  if (receipt) artifacts["receipt"] = receipt->to_json();
  if (provenance) {
    artifacts["provenance"] = provenance->to_json();
    artifacts["provenanceHash"] = provenance_hash(*provenance).hex();
  }
  if (exec_log) artifacts["execLogHash"] = exec_log->hash().hex();
  if (output_cid) artifacts["outputCid"] = output_cid->str();
  if (inline_result) artifacts["inlineResult"] = *inline_result;
  if (!delivered.empty()) artifacts["deliveredCid"] = Cid::of(delivered).str();

  Json verdicts = Json::object();
  if (receipt_verdict) verdicts["receipt"] = receipt_verdict->to_json();
  if (provenance_verdict) verdicts["provenance"] = provenance_verdict->to_json();

  Json hist = Json::array();
  for (const auto& [at, phase] : history) {
    hist.push_back(Json{{"atMs", at}, {"phase", session_phase_name(phase)}});
  }
  Json j{{"sessionId", session_id},
         {"mode", session_mode_name(mode)},
         {"workload", workload.to_json()},
         {"releaseAttribution", release_attribution_name(attribution)},
         {"phaseTimings", timings.to_json()},
         {"overlappedTimings", overlapped.to_json()},
         {"serialTimings", serial.to_json()},
         {"gasReceipts", receipts},
         {"gasTotal", gas_total()},
         {"artifacts", artifacts},
         {"verdicts", verdicts},
         {"finalState", state.str()},
         {"history", hist},
         {"startMs", start_ms},
         {"endMs", end_ms},
         {"settledMs", settled_ms},
         {"user", user.hex()},
         {"service", service.hex()}};
  if (release_evidence) j["releaseEvidence"] = release_evidence->hex();
  return j;
}

Digest32 transcript_set_hash(const std::vector<const SessionTranscript*>& transcripts) {
  Bytes material;
  for (const auto* t : transcripts) {
    Digest32 d = sha256(canonicalize(t->to_json()));
    material.insert(material.end(), d.raw().begin(), d.raw().end());
  }
  return sha256(material);
}

// ---- agents ---------------------------------------------------------------

struct Simulation::UserAgent {
  AgentIdentity identity;
  Rng rng;
  std::uint64_t requests = 0;
};

struct Simulation::ServiceAgent {
  ServiceAgent(AgentIdentity id, WorkloadSpec w, Rng r)
      : identity(std::move(id)), workload(std::move(w)), rng(std::move(r)) {}

  AgentIdentity identity;
  WorkloadSpec workload;
  CapabilityManifest manifest;
  ConsumedReceipts consumed;
  Rng rng;
};

struct Simulation::Session {
  std::size_t index = 0;
  SessionTranscript* t = nullptr;
  Address user;
  Address service;
  SessionHooks hooks;
  EndCallback on_end;
  ThreadId thread;
  std::uint64_t ua_nonce = 0;
  std::uint64_t sa_nonce = 0;

  // user agent view
  struct {
    std::optional<CapabilityManifest> manifest;
    ServiceRequest request;
    Digest32 request_hash;
    std::optional<Quote> quote;
    std::optional<Receipt> presented;
    bool lock_confirmed = false;
    bool delivery_verified = false;
  } ua;

  // service agent view
  struct {
    std::optional<ServiceRequest> request;
    Digest32 request_hash;
    std::optional<Quote> quote;
    std::optional<Receipt> accepted;
    std::optional<ProvenanceArtifact> artifact;
    std::optional<Digest32> release_tx;
  } sa;

  // critical-path timing
  std::map<PayloadType, std::int64_t> message_ms;
  std::int64_t anchor_order_wait = 0;
  std::int64_t lock_wait = 0;
  std::int64_t anchor_delivery_wait = 0;
  std::int64_t release_wait = 0;
  std::int64_t exec_ms = 0;
  std::optional<std::int64_t> delivered_at;
  std::optional<std::int64_t> released_at;
  bool ended = false;
};

Simulation::Simulation(const RunConfig& config, std::uint64_t seed)
    : config_(config),
      rng_(seed),
      ledger_(config.ledger_config()),
      bus_(config.bus_latency, seed ^ 0x5bd1e995ULL, config.msg_cap_per_s),
      store_(config.upload) {
  bus_.set_delivery_listener([this](const Address& receiver, std::int64_t at) {
    deliveries_[receiver].push_back(at);
    ++deliveries_total_;
    scheduler_.at(at, [this, receiver] { wake(receiver); });
  });
}

Simulation::~Simulation() = default;

Address Simulation::add_service(const WorkloadSpec& workload, std::uint64_t identity_seed) {
  auto sa = std::make_unique<ServiceAgent>(AgentIdentity::from_seed(identity_seed), workload, rng_.fork());
  sa->manifest = workload_manifest(workload, sa->identity);
  registry_.advertise(sa->manifest);
  const Address addr = sa->identity.address();
  bus_.register_inbox(addr);
  services_.emplace(addr, std::move(sa));
  return addr;
}

Address Simulation::add_user(std::uint64_t identity_seed, Amount balance) {
  auto ua = std::make_unique<UserAgent>(UserAgent{AgentIdentity::from_seed(identity_seed), rng_.fork(), 0});
  const Address addr = ua->identity.address();
  if (balance.is_positive()) ledger_.add_genesis_balance(addr, balance);
  bus_.register_inbox(addr);
  users_.emplace(addr, std::move(ua));
  return addr;
}

const AgentIdentity& Simulation::identity(const Address& agent) const {
  if (auto it = users_.find(agent); it != users_.end()) return it->second->identity;
  if (auto it = services_.find(agent); it != services_.end()) return it->second->identity;
  throw Error(Errc::NotFound, "unknown agent " + agent.hex());
}

const std::vector<std::int64_t>& Simulation::deliveries_to(const Address& receiver) const {
  static const std::vector<std::int64_t> kNone;
  auto it = deliveries_.find(receiver);
  return it == deliveries_.end() ? kNone : it->second;
}

std::vector<const SessionTranscript*> Simulation::transcripts() const {
  std::vector<const SessionTranscript*> out;
  out.reserve(transcripts_.size());
  for (const auto& t : transcripts_) out.push_back(t.get());
  return out;
}

std::vector<TxReceipt> Simulation::register_all() {
  auto receipts = std::make_shared<std::vector<TxReceipt>>();
  auto enroll = [&](const AgentIdentity& id) {
    if (ledger_.is_registered(id.address())) return;
    submit(ledger_.register_identity_tx(id), nullptr,
           [receipts](const TxReceipt& r) { receipts->push_back(r); });
  };
  for (const auto& [addr, ua] : users_) enroll(ua->identity);
  for (const auto& [addr, sa] : services_) enroll(sa->identity);
  scheduler_.run();
  return *receipts;
}

// ---- substrate plumbing ---------------------------------------------------

void Simulation::schedule_block_event() {
  auto next = ledger_.next_pending_block_ms();
  if (!next || block_events_.contains(*next)) return;
  block_events_.insert(*next);
  scheduler_.at(std::max(*next, scheduler_.now()), [this, at = *next] {
    block_events_.erase(at);
    on_block();
  });
}

void Simulation::on_block() {
  for (const TxReceipt& r : ledger_.produce_blocks_until(scheduler_.now())) {
    auto node = tx_waiters_.extract(r.tx_hash);
    if (node.empty()) continue;
    for (auto& done : node.mapped()) done(r);
  }
  schedule_block_event();
}

void Simulation::submit(const Transaction& tx, Session* session,
                        std::function<void(const TxReceipt&)> done) {
  ledger_.submit(tx, scheduler_.now());
  tx_waiters_[tx.tx_hash].push_back([this, session, done = std::move(done)](const TxReceipt& r) {
    if (session) session->t->gas_receipts.push_back(r);
    if (done) done(r);
  });
  schedule_block_event();
}

void Simulation::send(const AgentIdentity& from, const Address& to, Session& s, PayloadType type,
                      const Json& payload, bool critical) {
  std::uint64_t& nonce = from.address() == s.user ? s.ua_nonce : s.sa_nonce;
  auto env = MessageEnvelope::seal(from, to, s.thread, ++nonce, scheduler_.now(), type, payload);
  DeliveryHandle h = bus_.send(env, scheduler_.now());
  if (critical && !h.dropped && !s.message_ms.contains(type)) {
    s.message_ms[type] = h.delivery_ms - scheduler_.now();
  }
}

void Simulation::wake(const Address& agent) {
  for (const MessageEnvelope& env : bus_.receive(agent, scheduler_.now())) {
    Session* s = session_by_thread(env.thread_id);
    if (!s) continue;
    if (agent == s->user && env.sender == s->service) {
      ua_on_message(*s, env);
    } else if (agent == s->service && env.sender == s->user) {
      sa_on_message(*services_.at(agent), env);
    }
  }
}

Simulation::Session* Simulation::session_by_thread(const ThreadId& thread) {
  auto it = thread_index_.find(thread);
  return it == thread_index_.end() ? nullptr : sessions_[it->second].get();
}

// ---- session lifecycle ----------------------------------------------------

std::size_t Simulation::start_session(const Address& user, const Address& service, std::int64_t at_ms,
                                      SessionHooks hooks, EndCallback on_end) {
  if (!users_.contains(user)) throw Error(Errc::NotFound, "unknown user agent " + user.hex());
  const std::size_t index = sessions_.size();
  auto t = std::make_unique<SessionTranscript>();
  char id[32];
  std::snprintf(id, sizeof id, "s%06zu", index);
  t->session_id = id;
  t->mode = config_.mode;
  t->attribution = config_.attribution;
  t->user = user;
  t->service = service;
  if (auto it = services_.find(service); it != services_.end()) t->workload = it->second->workload;

  auto s = std::make_unique<Session>();
  s->index = index;
  s->t = t.get();
  s->user = user;
  s->service = service;
  s->hooks = std::move(hooks);
  s->on_end = std::move(on_end);
  Session* raw = s.get();
  sessions_.push_back(std::move(s));
  transcripts_.push_back(std::move(t));
  scheduler_.at(at_ms, [this, raw] { ua_begin(*raw); });
  return index;
}

void Simulation::advance(Session& s, SessionPhase to) {
  if (!legal_transition(s.t->state.phase, to)) {
    throw std::logic_error(std::string("illegal session transition ") +
                           std::string(session_phase_name(s.t->state.phase)) + " -> " +
                           std::string(session_phase_name(to)));
  }
  s.t->state.phase = to;
  s.t->history.emplace_back(scheduler_.now(), to);
}

void Simulation::ua_begin(Session& s) {
  SessionTranscript& t = *s.t;
  UserAgent& ua = *users_.at(s.user);
  t.start_ms = scheduler_.now();
  t.history.emplace_back(t.start_ms, SessionPhase::Discovery);
  scheduler_.after(config_.session_timeout_ms, [this, &s] {
    if (!s.t->state.terminal()) fail(s, FailureReason::Timeout);
  });

  DiscoveryQuery q;
  q.service_id = workload_service_id(t.workload.kind);
  std::optional<CapabilityManifest> manifest;
  for (auto& m : registry_.discover(q)) {
    if (m.payee == s.service) manifest = std::move(m);
  }
  if (!manifest) {
    fail(s, FailureReason::ServiceNotFound);
    return;
  }
  s.ua.manifest = std::move(manifest);
  ServiceRequest req;
  req.service_id = s.ua.manifest->service_id;
  req.params = workload_request_params(t.workload, ua.requests++);
  req.requester = s.user;
  req.client_nonce = ua.rng.fixed_bytes<Nonce32>();
  s.ua.request = req;
  s.ua.request_hash = request_digest(req);
  t.request = req;
  t.request_hash = s.ua.request_hash;

  s.thread = bus_.open_thread(s.user, s.service);
  thread_index_.emplace(s.thread, s.index);
  send(ua.identity, s.service, s, PayloadType::ServiceRequest, Json{{"request", req.to_json()}}, true);
}

void Simulation::ua_on_message(Session& s, const MessageEnvelope& env) {
  if (s.t->state.terminal()) return;
  Json payload;
  try {
    payload = env.payload_json();
  } catch (const Error&) {
    return;
  }
  switch (env.payload_type) {
    case PayloadType::PaymentChallenge402: ua_on_challenge(s, payload); break;
    case PayloadType::Delivery: ua_on_delivery(s, payload); break;
    case PayloadType::SessionRejected: {
      FailureReason reason = FailureReason::BindingMismatch;
      try {
        reason = parse_failure_reason(require_string(payload, "reason"));
      } catch (const Error&) {
      }
      fail(s, reason);
      break;
    }
    default: break;
  }
}

void Simulation::ua_on_challenge(Session& s, const Json& payload) {
  if (s.ua.quote || s.t->state.phase != SessionPhase::Discovery) return;
  Quote quote;
  try {
    quote = PaymentChallenge::from_json(payload).quote;
  } catch (const Error&) {
    fail(s, FailureReason::BindingMismatch);
    return;
  }
  s.ua.quote = quote;
  s.t->quote = quote;
  if (!s.hooks.skip_quote_checks) {
    if (quote.payee != s.ua.manifest->payee) return fail(s, FailureReason::PayeeMismatch);
    if (!quote.signature_valid()) return fail(s, FailureReason::SignerMismatch);
    if (quote.request_hash != s.ua.request_hash) return fail(s, FailureReason::BindingMismatch);
    Amount expected;
    try {
      expected = price_request(*s.ua.manifest, s.ua.request);
    } catch (const Error&) {
      return fail(s, FailureReason::SchemaViolation);
    }
    if (quote.price != expected) return fail(s, FailureReason::AmountMismatch);
  }
  advance(s, SessionPhase::Quoted);
  if (s.hooks.pay_delay_ms > 0) {
    scheduler_.after(s.hooks.pay_delay_ms, [this, &s] {
      if (!s.t->state.terminal()) ua_pay(s);
    });
  } else {
    ua_pay(s);
  }
}

void Simulation::ua_pay(Session& s) {
  const Quote& quote = *s.ua.quote;
  if (!s.hooks.skip_quote_checks) {
    try {
      check_quote_payable(quote, scheduler_.now());
    } catch (const Error& e) {
      return fail(s, e.code() == Errc::QuoteExpired ? FailureReason::QuoteExpired
                                                    : FailureReason::SignerMismatch);
    }
  }
  if (s.hooks.replay_receipt) {
    advance(s, SessionPhase::Paying);
    ua_present_receipt(s, *s.hooks.replay_receipt);
    return;
  }
  if (ledger_.balance(s.user) < quote.price) return fail(s, FailureReason::InsufficientBalance);
  advance(s, SessionPhase::Paying);

  auto lock = [this, &s] {
    const Quote& q = *s.ua.quote;
    LockParams p{quote_id(q), q.request_hash, q.payee, q.price, q.expiry_ms};
    if (s.hooks.tamper_lock) s.hooks.tamper_lock(p);
    submit(ledger_.lock_tx(s.user, p.quote_id, p.request_hash, p.payee, p.amount, p.expiry_ms), &s,
           [this, &s](const TxReceipt& r) { ua_on_lock(s, r); });
  };
  if (config_.mode == SessionMode::Web3Baseline) {
    const Digest32 order = sha256(canonicalize(Json{{"quoteId", quote_id(quote).hex()},
                                                    {"requestHash", quote.request_hash.hex()},
                                                    {"payer", s.user.hex()}}));
    submit(ledger_.anchor_tx(TxKind::AnchorOrder, s.user, order), &s,
           [this, &s, lock](const TxReceipt& r) {
             s.anchor_order_wait = r.confirmation_wait_ms();
             if (s.t->state.terminal()) return;
             if (!r.success()) return fail(s, FailureReason::LedgerRevert);
             lock();
           });
  } else {
    lock();
  }
}

void Simulation::ua_on_lock(Session& s, const TxReceipt& r) {
  s.lock_wait = r.confirmation_wait_ms();
  if (s.t->state.terminal()) return;
  if (!r.success()) return fail(s, failure_from_revert(r.revert_reason));
  s.ua.lock_confirmed = true;
  Receipt receipt = receipt_from_tx(r);
  if (s.hooks.early_refund) {
    submit(ledger_.refund_tx(s.user, receipt.event.quote_id), &s, {});
  }
  ua_present_receipt(s, receipt);
}

void Simulation::ua_present_receipt(Session& s, const Receipt& receipt) {
  Receipt presented = receipt;
  if (s.hooks.tamper_receipt) s.hooks.tamper_receipt(presented);
  s.ua.presented = presented;
  s.t->receipt = presented;
  send(users_.at(s.user)->identity, s.service, s, PayloadType::PaymentReceipt,
       Json{{"receipt", presented.to_json()}}, true);
}

void Simulation::ua_on_delivery(Session& s, const Json& payload) {
  if (s.ua.delivery_verified || !s.ua.quote || !s.ua.presented) return;
  ProvenanceArtifact artifact;
  ExecutionLog log;
  Bytes content;
  try {
    artifact = ProvenanceArtifact::from_json(require(payload, "provenance"));
    log = ExecutionLog::from_json(require(payload, "execLog"));
    const Json& output = require(payload, "output");
    if (output.contains("inline")) {
      content = canonical_bytes(output["inline"]);
      s.t->inline_result = output["inline"];
    } else {
      const Cid cid = Cid::parse(require_string(output, "cid"));
      s.t->output_cid = cid;
      content = store_.get(cid, scheduler_.now());
    }
  } catch (const Error&) {
    return fail(s, FailureReason::CidMismatch);
  }
  if (s.hooks.mutate_delivery) s.hooks.mutate_delivery(content);
  s.t->delivered = content;
  s.t->provenance = artifact;
  s.t->exec_log = log;

  ProvenanceVerdict pv = verify_provenance(artifact, *s.ua.quote, *s.ua.presented, content);
  if (pv) {
    Verdict lv = verify_exec_log(artifact, log);
    if (!lv) pv.verdict = lv;
  }
  s.t->provenance_verdict = pv;
  if (!pv) return fail(s, failure_from(*pv.verdict.reason));

  s.ua.delivery_verified = true;
  s.delivered_at = scheduler_.now();
  if (s.hooks.resend_receipt) {
    send(users_.at(s.user)->identity, s.service, s, PayloadType::PaymentReceipt,
         Json{{"receipt", s.ua.presented->to_json()}}, false);
  }
  if (config_.attribution == ReleaseAttribution::Overlapped && !s.ended) {
    s.ended = true;
    s.t->end_ms = scheduler_.now();
    if (s.on_end) s.on_end(s.index, scheduler_.now());
  }
  maybe_settle(s);
}

// ---- service agent --------------------------------------------------------

void Simulation::sa_on_message(ServiceAgent& sa, const MessageEnvelope& env) {
  Session* s = session_by_thread(env.thread_id);
  if (!s) return;
  switch (env.payload_type) {
    case PayloadType::ServiceRequest: sa_on_request(sa, *s, env); break;
    case PayloadType::PaymentReceipt: {
      Json payload;
      try {
        payload = env.payload_json();
      } catch (const Error&) {
        return;
      }
      sa_on_receipt(sa, *s, payload);
      break;
    }
    default: break;
  }
}

void Simulation::sa_on_request(ServiceAgent& sa, Session& s, const MessageEnvelope& env) {
  if (s.sa.request) return;
  auto reject = [&](FailureReason reason) {
    send(sa.identity, s.user, s, PayloadType::SessionRejected,
         Json{{"reason", failure_reason_name(reason)}}, true);
  };
  ServiceRequest req;
  try {
    req = ServiceRequest::from_json(require(env.payload_json(), "request"));
  } catch (const Error&) {
    return reject(FailureReason::SchemaViolation);
  }
  if (req.requester != env.sender) return reject(FailureReason::PayerMismatch);
  if (req.service_id != sa.manifest.service_id) return reject(FailureReason::ServiceNotFound);
  s.sa.request = req;
  PaymentChallenge challenge;
  try {
    s.sa.request_hash = compute_request_hash(sa.manifest, req);
    challenge = issue_quote(sa.identity, s.sa.request_hash, sa.manifest, req, scheduler_.now(),
                            config_.quote_ttl_ms, sa.rng, ledger_.config().chain_id,
                            ledger_.config().escrow_ref);
  } catch (const Error&) {
    return reject(FailureReason::SchemaViolation);
  }
  if (s.hooks.tamper_quote) s.hooks.tamper_quote(challenge.quote);
  s.sa.quote = challenge.quote;
  send(sa.identity, s.user, s, PayloadType::PaymentChallenge402, challenge.to_json(), true);
}

void Simulation::sa_on_receipt(ServiceAgent& sa, Session& s, const Json& payload) {
  if (!s.sa.quote) return;
  Receipt receipt;
  try {
    receipt = Receipt::from_json(require(payload, "receipt"));
  } catch (const Error&) {
    return;
  }
  auto decision = sa.consumed.check_and_mark(ledger_, receipt, *s.sa.quote, s.sa.request->requester,
                                             scheduler_.now());
  if (s.sa.accepted) {
    // Retry on an accepted session: answer from the cache, never re-execute.
    if (decision.outcome == ConsumedReceipts::Outcome::CachedRetry && decision.cached_delivery) {
      send(sa.identity, s.user, s, PayloadType::Delivery, *decision.cached_delivery, false);
    }
    return;
  }
  if (s.t->state.terminal()) return;
  advance(s, SessionPhase::VerifyingReceipt);
  s.t->receipt_verdict = decision.verdict;
  if (decision.outcome != ConsumedReceipts::Outcome::Accepted) {
    send(sa.identity, s.user, s, PayloadType::SessionRejected,
         Json{{"reason", failure_reason_name(failure_from(*decision.verdict.reason))}}, true);
    return;
  }
  s.sa.accepted = receipt;
  advance(s, SessionPhase::Executing);
  const std::int64_t start = scheduler_.now();
  auto out = std::make_shared<WorkloadOutput>(
      execute_workload(sa.workload, *s.sa.request, s.sa.request_hash, quote_id(*s.sa.quote), store_, start));
  s.exec_ms = out->end_ms - start;
  scheduler_.at(out->end_ms, [this, &sa, &s, out] { sa_finish(sa, s, *out); });
}

void Simulation::sa_finish(ServiceAgent& sa, Session& s, const WorkloadOutput& out) {
  ProvenanceArtifact artifact = build_provenance(sa.identity, out.log, *s.sa.accepted, out.output_cid);
  s.sa.artifact = artifact;
  Json output = out.inline_result ? Json{{"inline", *out.inline_result}}
                                  : Json{{"cid", out.output_cid.str()}};
  Json delivery{{"quoteId", artifact.quote_id.hex()},
                {"provenance", artifact.to_json()},
                {"execLog", out.log.to_json()},
                {"output", output}};
  sa.consumed.store_delivery(artifact.quote_id, delivery);
  if (config_.mode == SessionMode::Web3Baseline) {
    submit(ledger_.anchor_tx(TxKind::AnchorDelivery, sa.identity.address(), provenance_hash(artifact)), &s,
           [this, &sa, &s, delivery](const TxReceipt& r) {
             s.anchor_delivery_wait = r.confirmation_wait_ms();
             sa_deliver(sa, s, delivery);
           });
  } else {
    sa_deliver(sa, s, delivery);
  }
}

void Simulation::sa_deliver(ServiceAgent& sa, Session& s, const Json& delivery) {
  if (!s.t->state.terminal()) advance(s, SessionPhase::Delivering);
  send(sa.identity, s.user, s, PayloadType::Delivery, delivery, true);
  const Digest32 qid = s.sa.artifact->quote_id;
  const Digest32 evidence = provenance_hash(*s.sa.artifact);
  Transaction release = ledger_.release_tx(sa.identity.address(), qid, evidence);
  s.sa.release_tx = release.tx_hash;
  submit(release, &s, [this, &s](const TxReceipt& r) {
    s.release_wait = r.confirmation_wait_ms();
    if (!r.success()) {
      if (!s.t->state.terminal()) fail(s, FailureReason::LedgerRevert);
      return;
    }
    s.released_at = r.block_timestamp_ms;
    if (auto e = ledger_.escrow(s.sa.artifact->quote_id)) s.t->release_evidence = e->evidence;
    maybe_settle(s);
  });
  if (s.hooks.double_release) {
    submit(ledger_.release_tx(sa.identity.address(), qid, evidence), &s, {});
  }
}

// ---- outcomes -------------------------------------------------------------

void Simulation::maybe_settle(Session& s) {
  SessionTranscript& t = *s.t;
  if (t.state.terminal() || !s.ua.delivery_verified || !s.released_at) return;
  if (!t.receipt_verdict || !*t.receipt_verdict) return;
  if (!t.provenance_verdict || !*t.provenance_verdict) return;
  auto escrow = ledger_.escrow(t.provenance->quote_id);
  if (!escrow || escrow->status != EscrowStatus::Released ||
      escrow->evidence != provenance_hash(*t.provenance)) {
    return;
  }
  advance(s, SessionPhase::Settled);
  finalize(s);
}

void Simulation::fail(Session& s, FailureReason reason) {
  if (s.t->state.terminal()) return;
  advance(s, SessionPhase::Failed);
  s.t->state.failure = reason;
  finalize(s);
  schedule_refund(s);
}

void Simulation::finalize(Session& s) {
  SessionTranscript& t = *s.t;
  const std::int64_t now = scheduler_.now();
  t.settled_ms = now;

  std::int64_t messaging = 0;
  for (const auto& [type, ms] : s.message_ms) messaging += ms;
  const std::int64_t confirmation = s.anchor_order_wait + s.lock_wait + s.anchor_delivery_wait;

  PhaseTimings o;
  o.messaging_ms = messaging;
  o.confirmation_ms = confirmation;
  o.execution_delivery_ms = s.exec_ms;
  o.total_ms = (s.delivered_at ? *s.delivered_at : now) - t.start_ms;

  PhaseTimings serial = o;
  if (t.state.settled() && s.released_at && *s.released_at > *s.delivered_at) {
    serial.messaging_ms -= s.message_ms.count(PayloadType::Delivery) ? s.message_ms[PayloadType::Delivery] : 0;
    serial.confirmation_ms += s.release_wait;
    serial.total_ms = *s.released_at - t.start_ms;
  } else if (!s.delivered_at) {
    serial.total_ms = now - t.start_ms;
  } else {
    serial.total_ms = std::max(now, *s.delivered_at) - t.start_ms;
  }
  t.overlapped = o;
  t.serial = serial;
  t.timings = config_.attribution == ReleaseAttribution::Overlapped ? o : serial;

  if (!s.ended) {
    s.ended = true;
    t.end_ms = now;
    if (s.on_end) s.on_end(s.index, now);
  }
}

void Simulation::schedule_refund(Session& s) {
  if (!config_.refund_on_failure || !s.ua.lock_confirmed || !s.ua.quote) return;
  const Digest32 qid = quote_id(*s.ua.quote);
  const std::int64_t at = std::max(scheduler_.now(), s.ua.quote->expiry_ms);
  scheduler_.at(at, [this, &s, qid] {
    auto e = ledger_.escrow(qid);
    if (!e || e->status != EscrowStatus::Locked || e->payer != s.user) return;
    submit(ledger_.refund_tx(s.user, qid), &s, {});
  });
}

std::unique_ptr<Simulation> simulate_session(const RunConfig& config, WorkloadKind workload,
                                             SessionMode mode, std::uint64_t seed, SessionHooks hooks) {
  RunConfig c = config;
  c.mode = mode;
  auto sim = std::make_unique<Simulation>(c, seed);
  const Address sa = sim->add_service(c.workload_spec(workload), seed * 2 + 1);
  const Address ua = sim->add_user(seed * 2 + 2, c.ua_balance);
  sim->register_all();
  sim->start_session(ua, sa, sim->now(), std::move(hooks));
  sim->run();
  return sim;
}

SessionTranscript run_session(const RunConfig& config, WorkloadKind workload, SessionMode mode,
                              std::uint64_t seed, SessionHooks hooks) {
  return simulate_session(config, workload, mode, seed, std::move(hooks))->transcript(0);
}

}  // namespace agentosi
