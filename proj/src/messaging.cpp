#include "agentosi/messaging.hpp"

#include <cmath>

namespace agentosi {

namespace {

constexpr std::pair<PayloadType, std::string_view> kPayloadNames[] = {
    {PayloadType::ServiceRequest, "service_request"},
    {PayloadType::PaymentChallenge402, "payment_challenge_402"},
    {PayloadType::PaymentReceipt, "payment_receipt"},
    {PayloadType::Delivery, "delivery"},
    {PayloadType::SessionRejected, "session_rejected"},
    {PayloadType::Text, "text"},
};

}  // namespace

std::string_view payload_type_name(PayloadType type) {
  for (const auto& [t, name] : kPayloadNames) {
    if (t == type) return name;
  }
  return "text";
}

PayloadType parse_payload_type(std::string_view name) {
  for (const auto& [t, n] : kPayloadNames) {
    if (n == name) return t;
  }
  throw Error(Errc::MalformedObject, "unknown payload type '" + std::string(name) + "'");
}

MessageEnvelope MessageEnvelope::seal(const AgentIdentity& sender, const Address& receiver,
                                      const ThreadId& thread, std::uint64_t nonce,
                                      std::int64_t timestamp_ms, PayloadType type,
                                      const Json& payload) {
  MessageEnvelope env;
  env.sender = sender.address();
  env.receiver = receiver;
  env.thread_id = thread;
  env.nonce = nonce;
  env.timestamp_ms = timestamp_ms;
  env.payload_type = type;
  env.payload = canonicalize(payload);
  env.signature = sender.sign(env.signing_bytes());
  return env;
}

Json MessageEnvelope::unsigned_json() const {
  return Json{{"sender", sender.hex()},
              {"receiver", receiver.hex()},
              {"threadId", thread_id.hex()},
              {"nonce", nonce},
              {"timestampMs", timestamp_ms},
              {"payloadType", payload_type_name(payload_type)},
              {"payload", payload}};
}

bool MessageEnvelope::signature_valid() const {
  return signature.signer == sender && verify_signer(signing_bytes(), signature);
}

Json MessageEnvelope::to_json() const {
  Json j = unsigned_json();
  j["signature"] = signature.to_json();
  return j;
}

MessageEnvelope MessageEnvelope::from_json(const Json& j) {
  MessageEnvelope env;
  env.sender = require_fixed<Address>(j, "sender");
  env.receiver = require_fixed<Address>(j, "receiver");
  env.thread_id = require_fixed<ThreadId>(j, "threadId");
  env.nonce = require_uint(j, "nonce");
  env.timestamp_ms = require_int(j, "timestampMs");
  env.payload_type = parse_payload_type(require_string(j, "payloadType"));
  env.payload = require_string(j, "payload");
  env.signature = Signature::from_json(require(j, "signature"));
  return env;
}

Json AuditEntry::to_json() const {
  return Json{{"atMs", at_ms}, {"reason", reason}, {"envelope", envelope.to_json()}};
}

std::optional<std::int64_t> Inbox::next_delivery_ms() const {
  if (in_flight_.empty()) return std::nullopt;
  return in_flight_.begin()->first.first;
}

std::uint64_t Inbox::high_water(const Address& sender, const ThreadId& thread) const {
  auto it = seen_nonces_.find({sender, thread});
  return it == seen_nonces_.end() ? 0 : it->second;
}

MessageBus::MessageBus(LatencyModel latency, std::uint64_t seed, double inbox_cap_msgs_per_s)
    : latency_(latency), rng_(seed) {
  if (latency_.min_ms < 0 || latency_.max_ms < latency_.min_ms) {
    throw Error(Errc::Config, "latency model needs 0 <= min_ms <= max_ms");
  }
  if (inbox_cap_msgs_per_s > 0.0) {
    // Integer spacing rounded up so the delivered rate never exceeds the cap.
    spacing_ms_ = static_cast<std::int64_t>(std::ceil(1000.0 / inbox_cap_msgs_per_s));
  }
}

void MessageBus::register_inbox(const Address& owner) {
  std::lock_guard lock(mutex_);
  inboxes_.try_emplace(owner, owner);
}

bool MessageBus::has_inbox(const Address& owner) const {
  std::lock_guard lock(mutex_);
  return inboxes_.contains(owner);
}

Inbox& MessageBus::inbox_mut(const Address& owner) {
  auto it = inboxes_.find(owner);
  if (it == inboxes_.end()) {
    throw Error(Errc::UnknownReceiver, owner.hex());
  }
  return it->second;
}

const Inbox& MessageBus::inbox(const Address& owner) const {
  std::lock_guard lock(mutex_);
  auto it = inboxes_.find(owner);
  if (it == inboxes_.end()) {
    throw Error(Errc::UnknownReceiver, owner.hex());
  }
  return it->second;
}

DeliveryHandle MessageBus::send(const MessageEnvelope& envelope, std::int64_t now_ms) {
  if (!envelope.signature_valid()) {
    throw Error(Errc::InvalidSignature, "envelope signature does not verify against sender");
  }
  DeliveryHandle handle;
  {
    std::lock_guard lock(mutex_);
    Inbox& box = inbox_mut(envelope.receiver);
    handle.sequence = ++sequence_;
    std::int64_t latency = rng_.uniform_int(latency_.min_ms, latency_.max_ms);
    if (rng_.bernoulli(latency_.drop_probability)) {
      handle.dropped = true;
      handle.delivery_ms = now_ms + latency;
      audit_.push_back({now_ms, "dropped_in_transit", envelope});
      return handle;
    }
    std::int64_t at = now_ms + latency;
    if (spacing_ms_ > 0 && box.last_delivery_ms_ != INT64_MIN) {
      at = std::max(at, box.last_delivery_ms_ + spacing_ms_);
    }
    box.last_delivery_ms_ = std::max(box.last_delivery_ms_, at);
    handle.delivery_ms = at;
    box.in_flight_.emplace(std::make_pair(at, handle.sequence), envelope);
  }
  if (listener_) listener_(envelope.receiver, handle.delivery_ms);
  return handle;
}

std::vector<MessageEnvelope> MessageBus::receive(const Address& owner, std::int64_t now_ms) {
  std::lock_guard lock(mutex_);
  Inbox& box = inbox_mut(owner);
  while (!box.in_flight_.empty() && box.in_flight_.begin()->first.first <= now_ms) {
    auto node = box.in_flight_.extract(box.in_flight_.begin());
    MessageEnvelope& env = node.mapped();
    if (!env.signature_valid()) {
      audit_.push_back({now_ms, "invalid_signature", std::move(env)});
      continue;
    }
    auto& mark = box.seen_nonces_[{env.sender, env.thread_id}];
    if (env.nonce <= mark) {
      audit_.push_back({now_ms, "replayed_nonce", std::move(env)});
      continue;
    }
    mark = env.nonce;
    box.queue_.push_back(std::move(env));
  }
  std::vector<MessageEnvelope> out;
  out.swap(box.queue_);
  box.delivered_ += out.size();
  return out;
}

ThreadId MessageBus::open_thread(const Address&, const Address&) {
  std::lock_guard lock(mutex_);
  for (;;) {
    ThreadId id = rng_.fixed_bytes<ThreadId>();
    if (threads_.insert(id).second) return id;
  }
}

}  // namespace agentosi
