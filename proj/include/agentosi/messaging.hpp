#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "agentosi/bytes.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/crypto.hpp"
#include "agentosi/rng.hpp"

namespace agentosi {

enum class PayloadType {
  ServiceRequest,
  PaymentChallenge402,
  PaymentReceipt,
  Delivery,
  SessionRejected,
  Text,
};

std::string_view payload_type_name(PayloadType type);
PayloadType parse_payload_type(std::string_view name);

struct MessageEnvelope {
  Address sender;
  Address receiver;
  ThreadId thread_id;
  std::uint64_t nonce = 0;
  std::int64_t timestamp_ms = 0;
  PayloadType payload_type = PayloadType::Text;
  std::string payload;  // canonical JSON text
  Signature signature;

  // Builds the envelope, canonicalizes `payload` and signs every field.
  static MessageEnvelope seal(const AgentIdentity& sender, const Address& receiver,
                              const ThreadId& thread, std::uint64_t nonce,
                              std::int64_t timestamp_ms, PayloadType type, const Json& payload);

  Json unsigned_json() const;
  std::string signing_bytes() const { return canonicalize(unsigned_json()); }
  bool signature_valid() const;
  Json payload_json() const { return parse_json(payload); }

  Json to_json() const;
  static MessageEnvelope from_json(const Json& j);
};

struct LatencyModel {
  std::int64_t min_ms = 5;
  std::int64_t max_ms = 10;
  double drop_probability = 0.0;
};

struct AuditEntry {
  std::int64_t at_ms = 0;
  std::string reason;  // "invalid_signature", "replayed_nonce", "dropped_in_transit"
  MessageEnvelope envelope;

  Json to_json() const;
};

struct DeliveryHandle {
  std::uint64_t sequence = 0;
  std::int64_t delivery_ms = 0;
  bool dropped = false;
};

// Per-agent mailbox. Envelopes sit in `in_flight` until their delivery time,
// then pass the signature and nonce gates into `queue`, where they stay
// until the owner consumes them.
class Inbox {
 public:
  explicit Inbox(Address owner) : owner_(owner) {}

  const Address& owner() const { return owner_; }
  std::size_t in_flight() const { return in_flight_.size(); }
  std::size_t queued() const { return queue_.size(); }
  std::optional<std::int64_t> next_delivery_ms() const;
  std::uint64_t high_water(const Address& sender, const ThreadId& thread) const;

 private:
  friend class MessageBus;

  Address owner_;
  std::multimap<std::pair<std::int64_t, std::uint64_t>, MessageEnvelope> in_flight_;
  std::vector<MessageEnvelope> queue_;
  std::map<std::pair<Address, ThreadId>, std::uint64_t> seen_nonces_;
  std::int64_t last_delivery_ms_ = INT64_MIN;
  std::uint64_t delivered_ = 0;
};

// Single logical relay with latency injection and an optional per-inbox
// ingest cap. Sends are serialized per bus; each inbox has one consumer.
class MessageBus {
 public:
  // Called with (receiver, delivery_ms) for every accepted send so a
  // scheduler can wake the receiver.
  using DeliveryListener = std::function<void(const Address&, std::int64_t)>;

  MessageBus(LatencyModel latency, std::uint64_t seed, double inbox_cap_msgs_per_s = 0.0);

  void register_inbox(const Address& owner);
  bool has_inbox(const Address& owner) const;

  // Throws Errc::InvalidSignature or Errc::UnknownReceiver.
  DeliveryHandle send(const MessageEnvelope& envelope, std::int64_t now_ms);

  // Everything delivered by now_ms, in delivery order. Invalid signatures
  // and replayed nonces are dropped into the audit log.
  std::vector<MessageEnvelope> receive(const Address& owner, std::int64_t now_ms);

  ThreadId open_thread(const Address& initiator, const Address& responder);

  const Inbox& inbox(const Address& owner) const;
  const std::vector<AuditEntry>& audit_log() const { return audit_; }
  void set_delivery_listener(DeliveryListener listener) { listener_ = std::move(listener); }

  const LatencyModel& latency_model() const { return latency_; }
  std::int64_t min_spacing_ms() const { return spacing_ms_; }
  std::uint64_t total_sent() const { return sequence_; }

 private:
  Inbox& inbox_mut(const Address& owner);

  LatencyModel latency_;
  Rng rng_;
  std::int64_t spacing_ms_ = 0;
  std::uint64_t sequence_ = 0;
  std::unordered_map<Address, Inbox, FixedBytesHash> inboxes_;
  std::set<ThreadId> threads_;
  std::vector<AuditEntry> audit_;
  DeliveryListener listener_;
  mutable std::mutex mutex_;
};

}  // namespace agentosi
