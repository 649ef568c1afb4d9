#include "agentosi/provenance.hpp"

namespace agentosi {

Json ExecutionLogEntry::to_json() const {
  return Json{{"stepIndex", step_index},
              {"toolName", tool_name},
              {"inputHash", input_hash.hex()},
              {"outputHash", output_hash.hex()},
              {"simTimestampMs", sim_timestamp_ms}};
}

ExecutionLogEntry ExecutionLogEntry::from_json(const Json& j) {
  return ExecutionLogEntry{require_uint(j, "stepIndex"), require_string(j, "toolName"),
                           require_fixed<Digest32>(j, "inputHash"),
                           require_fixed<Digest32>(j, "outputHash"),
                           require_int(j, "simTimestampMs")};
}

void ExecutionLog::append(std::string tool_name, const Digest32& input_hash,
                          const Digest32& output_hash, std::int64_t sim_timestamp_ms) {
  entries.push_back(ExecutionLogEntry{entries.size(), std::move(tool_name), input_hash,
                                      output_hash, sim_timestamp_ms});
}

bool ExecutionLog::well_formed() const {
  if (entries.empty()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].step_index != i) return false;
  }
  return true;
}

Json ExecutionLog::to_json() const {
  Json list = Json::array();
  for (const auto& e : entries) list.push_back(e.to_json());
  return Json{{"requestHash", request_hash.hex()}, {"quoteId", quote_id.hex()}, {"entries", list}};
}

ExecutionLog ExecutionLog::from_json(const Json& j) {
  ExecutionLog log;
  log.request_hash = require_fixed<Digest32>(j, "requestHash");
  log.quote_id = require_fixed<Digest32>(j, "quoteId");
  const Json& list = require(j, "entries");
  if (!list.is_array()) throw Error(Errc::MalformedObject, "entries must be an array");
  for (const auto& e : list) log.entries.push_back(ExecutionLogEntry::from_json(e));
  return log;
}

Json ProvenanceArtifact::unsigned_json() const {
  return Json{{"requestHash", request_hash.hex()},
              {"quoteId", quote_id.hex()},
              {"receiptTxHash", receipt_tx_hash.hex()},
              {"outputCid", output_cid.str()},
              {"execLogHash", exec_log_hash.hex()},
              {"sa", sa.hex()}};
}

Json ProvenanceArtifact::to_json() const {
  Json j = unsigned_json();
  j["signature"] = signature.to_json();
  return j;
}

ProvenanceArtifact ProvenanceArtifact::from_json(const Json& j) {
  ProvenanceArtifact a;
  a.request_hash = require_fixed<Digest32>(j, "requestHash");
  a.quote_id = require_fixed<Digest32>(j, "quoteId");
  a.receipt_tx_hash = require_fixed<Digest32>(j, "receiptTxHash");
  try {
    a.output_cid = Cid::parse(require_string(j, "outputCid"));
  } catch (const Error& e) {
    throw Error(Errc::MalformedObject, e.what());
  }
  a.exec_log_hash = require_fixed<Digest32>(j, "execLogHash");
  a.sa = require_fixed<Address>(j, "sa");
  a.signature = Signature::from_json(require(j, "signature"));
  return a;
}

Json ProvenanceVerdict::to_json() const {
  Json j = verdict.to_json();
  j["assurance"] = assurance_level_name(assurance);
  return j;
}

ProvenanceArtifact build_provenance(const AgentIdentity& sa_identity, const ExecutionLog& exec_log,
                                    const Receipt& receipt, const Cid& output_cid) {
  if (exec_log.request_hash != receipt.event.request_hash) {
    throw Error(Errc::BindingMismatch, "execution log request_hash differs from receipt");
  }
  if (exec_log.quote_id != receipt.event.quote_id) {
    throw Error(Errc::BindingMismatch, "execution log quote_id differs from receipt");
  }
  if (!exec_log.well_formed()) {
    throw Error(Errc::MalformedObject, "execution log must be non-empty with steps from 0");
  }
  ProvenanceArtifact a;
  a.request_hash = exec_log.request_hash;
  a.quote_id = exec_log.quote_id;
  a.receipt_tx_hash = receipt.tx_hash;
  a.output_cid = output_cid;
  a.exec_log_hash = exec_log.hash();
  a.sa = sa_identity.address();
  a.signature = sa_identity.sign(canonicalize(a.unsigned_json()));
  return a;
}

ProvenanceVerdict verify_provenance(const ProvenanceArtifact& artifact, const Quote& quote,
                                    const Receipt& receipt, ByteView delivered_content) {
  auto reject = [](RejectReason r, std::string detail) {
    return ProvenanceVerdict{Verdict::reject(r, std::move(detail))};
  };
  if (artifact.sa != quote.payee || artifact.signature.signer != artifact.sa ||
      !verify_signer(canonicalize(artifact.unsigned_json()), artifact.signature)) {
    return reject(RejectReason::SignerMismatch, "artifact not signed by the quote payee");
  }
  if (artifact.request_hash != quote.request_hash) {
    return reject(RejectReason::BindingMismatch, "request_hash");
  }
  if (artifact.quote_id != quote_id(quote)) return reject(RejectReason::BindingMismatch, "quote_id");
  if (artifact.receipt_tx_hash != receipt.tx_hash) {
    return reject(RejectReason::BindingMismatch, "receipt_tx_hash");
  }
  if (Cid::of(delivered_content) != artifact.output_cid) {
    return reject(RejectReason::CidMismatch, artifact.output_cid.str());
  }
  return ProvenanceVerdict{Verdict::accept()};
}

Verdict verify_exec_log(const ProvenanceArtifact& artifact, const ExecutionLog& exec_log) {
  if (exec_log.hash() != artifact.exec_log_hash) {
    return Verdict::reject(RejectReason::BindingMismatch, "exec_log_hash");
  }
  if (exec_log.request_hash != artifact.request_hash || exec_log.quote_id != artifact.quote_id) {
    return Verdict::reject(RejectReason::BindingMismatch, "execution log binding");
  }
  return Verdict::accept();
}

Digest32 provenance_hash(const ProvenanceArtifact& artifact) {
  return sha256(canonicalize(artifact.to_json()));
}

}  // namespace agentosi
