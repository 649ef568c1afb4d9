#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentosi/capability.hpp"
#include "agentosi/config.hpp"
#include "agentosi/content_store.hpp"
#include "agentosi/ledger.hpp"
#include "agentosi/messaging.hpp"
#include "agentosi/provenance.hpp"
#include "agentosi/scheduler.hpp"
#include "agentosi/settlement.hpp"
#include "agentosi/workload.hpp"

namespace agentosi {

enum class SessionPhase {
  Discovery,
  Quoted,
  Paying,
  VerifyingReceipt,
  Executing,
  Delivering,
  Settled,
  Failed,
};

std::string_view session_phase_name(SessionPhase p);
// Forward along the happy path, or to Failed from any non-terminal phase.
bool legal_transition(SessionPhase from, SessionPhase to);

enum class FailureReason {
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
  Timeout,
  InsufficientBalance,
  SchemaViolation,
  ServiceNotFound,
  LedgerRevert,
};

std::string_view failure_reason_name(FailureReason r);
FailureReason parse_failure_reason(std::string_view name);
FailureReason failure_from(RejectReason r);

struct SessionState {
  SessionPhase phase = SessionPhase::Discovery;
  std::optional<FailureReason> failure;

  bool terminal() const { return phase == SessionPhase::Settled || phase == SessionPhase::Failed; }
  bool settled() const { return phase == SessionPhase::Settled; }
  // "Settled" or "Failed(Reason)".
  std::string str() const;
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

struct PhaseTimings {
  std::int64_t messaging_ms = 0;
  std::int64_t confirmation_ms = 0;
  std::int64_t execution_delivery_ms = 0;
  std::int64_t total_ms = 0;

  double confirmation_share() const;
  Json to_json() const;
};

// Parameters of the escrow lock a user agent submits.
struct LockParams {
  Digest32 quote_id;
  Digest32 request_hash;
  Address payee;
  Amount amount;
  std::int64_t expiry_ms = 0;
};

// Adversarial drivers. Every hook defaults to honest behavior.
struct SessionHooks {
  // Service agent mutates the quote after signing it.
  std::function<void(Quote&)> tamper_quote;
  // User agent mutates the lock it submits.
  std::function<void(LockParams&)> tamper_lock;
  // User agent mutates the receipt it presents.
  std::function<void(Receipt&)> tamper_receipt;
  // User agent presents this receipt instead of paying.
  std::optional<Receipt> replay_receipt;
  // User agent waits this long after the quote before paying.
  std::int64_t pay_delay_ms = 0;
  // User agent pays without its own quote checks.
  bool skip_quote_checks = false;
  // Delivered bytes are altered before the user agent sees them.
  std::function<void(Bytes&)> mutate_delivery;
  // Service agent submits the release a second time.
  bool double_release = false;
  // User agent submits a refund right after the lock confirms.
  bool early_refund = false;
  // User agent sends the same receipt twice.
  bool resend_receipt = false;
};

struct SessionTranscript {
  std::string session_id;
  SessionMode mode = SessionMode::AgentOsi;
  WorkloadSpec workload;
  ReleaseAttribution attribution = ReleaseAttribution::Overlapped;
  PhaseTimings timings;  // under `attribution`
  PhaseTimings overlapped;
  PhaseTimings serial;
  std::vector<TxReceipt> gas_receipts;

  std::optional<ServiceRequest> request;
  std::optional<Digest32> request_hash;
  std::optional<Quote> quote;
  std::optional<Receipt> receipt;
  std::optional<ProvenanceArtifact> provenance;
  std::optional<ExecutionLog> exec_log;
  std::optional<Cid> output_cid;
  std::optional<Json> inline_result;
  Bytes delivered;  // bytes the user agent received; exported, not serialized

  std::optional<Verdict> receipt_verdict;
  std::optional<ProvenanceVerdict> provenance_verdict;
  std::optional<Digest32> release_evidence;

  SessionState state;
  std::vector<std::pair<std::int64_t, SessionPhase>> history;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;      // under `attribution`
  std::int64_t settled_ms = 0;  // terminal state reached
  Address user;
  Address service;

  std::uint64_t gas_total() const { return agentosi::gas_total(gas_receipts); }
  Json to_json() const;
};

// sha256 over the concatenated digests of each canonical transcript.
Digest32 transcript_set_hash(const std::vector<const SessionTranscript*>& transcripts);

// Shared substrates (bus, ledger, store, registry) plus user and service
// agents, all driven by one scheduler. Agents interact only through the
// substrates; the simulation records transcripts as an observer.
class Simulation {
 public:
  using EndCallback = std::function<void(std::size_t session, std::int64_t end_ms)>;

  explicit Simulation(const RunConfig& config, std::uint64_t seed);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Creates a service agent offering `workload` and advertises its manifest.
  Address add_service(const WorkloadSpec& workload, std::uint64_t identity_seed);
  // Creates a user agent funded at genesis.
  Address add_user(std::uint64_t identity_seed, Amount balance);
  // Registers every agent identity on the ledger and runs until confirmed.
  // Returns the registration receipts.
  std::vector<TxReceipt> register_all();

  // Schedules a session of `user` against the service `service` at at_ms.
  // on_end fires at the session's end under the configured attribution.
  std::size_t start_session(const Address& user, const Address& service, std::int64_t at_ms,
                            SessionHooks hooks = {}, EndCallback on_end = {});

  void run_until(std::int64_t until_ms) { scheduler_.run_until(until_ms); }
  void run() { scheduler_.run(); }
  std::int64_t now() const { return scheduler_.now(); }

  std::size_t session_count() const { return transcripts_.size(); }
  const SessionTranscript& transcript(std::size_t index) const { return *transcripts_.at(index); }
  std::vector<const SessionTranscript*> transcripts() const;

  Ledger& ledger() { return ledger_; }
  const Ledger& ledger() const { return ledger_; }
  MessageBus& bus() { return bus_; }
  ContentStore& store() { return store_; }
  CapabilityRegistry& registry() { return registry_; }
  Scheduler& scheduler() { return scheduler_; }
  const RunConfig& config() const { return config_; }
  const AgentIdentity& identity(const Address& agent) const;

  // Delivery times of every envelope accepted for `receiver`.
  const std::vector<std::int64_t>& deliveries_to(const Address& receiver) const;
  std::uint64_t deliveries_total() const { return deliveries_total_; }

 private:
  struct UserAgent;
  struct ServiceAgent;
  struct Session;

  void schedule_block_event();
  void on_block();
  void submit(const Transaction& tx, Session* session, std::function<void(const TxReceipt&)> done);
  void send(const AgentIdentity& from, const Address& to, Session& s, PayloadType type,
            const Json& payload, bool critical);
  void wake(const Address& agent);

  void ua_begin(Session& s);
  void ua_on_message(Session& s, const MessageEnvelope& env);
  void ua_on_challenge(Session& s, const Json& payload);
  void ua_pay(Session& s);
  void ua_on_lock(Session& s, const TxReceipt& r);
  void ua_present_receipt(Session& s, const Receipt& receipt);
  void ua_on_delivery(Session& s, const Json& payload);
  void sa_on_message(ServiceAgent& sa, const MessageEnvelope& env);
  void sa_on_request(ServiceAgent& sa, Session& s, const MessageEnvelope& env);
  void sa_on_receipt(ServiceAgent& sa, Session& s, const Json& payload);
  void sa_finish(ServiceAgent& sa, Session& s, const WorkloadOutput& out);
  void sa_deliver(ServiceAgent& sa, Session& s, const Json& delivery);

  void advance(Session& s, SessionPhase to);
  void fail(Session& s, FailureReason reason);
  void maybe_settle(Session& s);
  void finalize(Session& s);
  void schedule_refund(Session& s);
  Session* session_by_thread(const ThreadId& thread);

  RunConfig config_;
  Rng rng_;
  Scheduler scheduler_;
  Ledger ledger_;
  MessageBus bus_;
  ContentStore store_;
  CapabilityRegistry registry_;

  std::map<Address, std::unique_ptr<UserAgent>> users_;
  std::map<Address, std::unique_ptr<ServiceAgent>> services_;
  std::vector<std::unique_ptr<Session>> sessions_;
  std::vector<std::unique_ptr<SessionTranscript>> transcripts_;
  std::map<ThreadId, std::size_t> thread_index_;
  std::map<Digest32, std::vector<std::function<void(const TxReceipt&)>>> tx_waiters_;
  std::map<Address, std::vector<std::int64_t>> deliveries_;
  std::uint64_t deliveries_total_ = 0;
  std::set<std::int64_t> block_events_;
};

// Convenience single-session drivers on a fresh simulation: one user agent
// funded with config.ua_balance and one service agent, registered first.
std::unique_ptr<Simulation> simulate_session(const RunConfig& config, WorkloadKind workload,
                                             SessionMode mode, std::uint64_t seed,
                                             SessionHooks hooks = {});
SessionTranscript run_session(const RunConfig& config, WorkloadKind workload, SessionMode mode,
                              std::uint64_t seed, SessionHooks hooks = {});

}  // namespace agentosi
