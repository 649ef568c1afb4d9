#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agentosi/bytes.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/content_store.hpp"
#include "agentosi/crypto.hpp"
#include "agentosi/settlement.hpp"

namespace agentosi {

struct ExecutionLogEntry {
  std::uint64_t step_index = 0;
  std::string tool_name;
  Digest32 input_hash;
  Digest32 output_hash;
  std::int64_t sim_timestamp_ms = 0;

  Json to_json() const;
  static ExecutionLogEntry from_json(const Json& j);
  friend bool operator==(const ExecutionLogEntry&, const ExecutionLogEntry&) = default;
};

struct ExecutionLog {
  Digest32 request_hash;
  Digest32 quote_id;
  std::vector<ExecutionLogEntry> entries;

  // Appends an entry with the next step index.
  void append(std::string tool_name, const Digest32& input_hash, const Digest32& output_hash,
              std::int64_t sim_timestamp_ms);
  // Step indices run 0, 1, 2, ...
  bool well_formed() const;
  Digest32 hash() const { return sha256(canonicalize(to_json())); }

  Json to_json() const;
  static ExecutionLog from_json(const Json& j);
  friend bool operator==(const ExecutionLog&, const ExecutionLog&) = default;
};

struct ProvenanceArtifact {
  Digest32 request_hash;
  Digest32 quote_id;
  Digest32 receipt_tx_hash;
  Cid output_cid;
  Digest32 exec_log_hash;
  Address sa;
  Signature signature;

  Json unsigned_json() const;
  Json to_json() const;
  static ProvenanceArtifact from_json(const Json& j);
  friend bool operator==(const ProvenanceArtifact&, const ProvenanceArtifact&) = default;
};

struct ProvenanceVerdict {
  Verdict verdict;
  AssuranceLevel assurance = AssuranceLevel::SignedLog;

  explicit operator bool() const { return verdict.accepted; }
  Json to_json() const;
};

// Throws Errc::BindingMismatch if the log is not bound to the receipt's
// request and quote, or Errc::MalformedObject for an empty or misnumbered log.
ProvenanceArtifact build_provenance(const AgentIdentity& sa_identity, const ExecutionLog& exec_log,
                                    const Receipt& receipt, const Cid& output_cid);

ProvenanceVerdict verify_provenance(const ProvenanceArtifact& artifact, const Quote& quote,
                                    const Receipt& receipt, ByteView delivered_content);

// Accept iff the retained log hashes to the artifact's exec_log_hash and is
// bound to the same request and quote.
Verdict verify_exec_log(const ProvenanceArtifact& artifact, const ExecutionLog& exec_log);

// sha256 of the canonical artifact including its signature; the evidence
// recorded on release.
Digest32 provenance_hash(const ProvenanceArtifact& artifact);

}  // namespace agentosi
