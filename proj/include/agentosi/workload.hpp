#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agentosi/amount.hpp"
#include "agentosi/capability.hpp"
#include "agentosi/content_store.hpp"
#include "agentosi/provenance.hpp"

namespace agentosi {

enum class WorkloadKind { Light, PipelineK, GenAI };

// CLI names: light, pipeline, genai.
std::string_view workload_kind_name(WorkloadKind k);
// Throws Errc::Config.
WorkloadKind parse_workload_kind(std::string_view name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::Light;
  std::int64_t overhead_ms = 2;          // Light
  std::int64_t k = 5;                    // PipelineK
  std::int64_t step_ms = 150;            // PipelineK
  std::int64_t artifact_bytes = 65'536;  // PipelineK, per step
  std::int64_t exec_ms = 4122;           // GenAI
  std::int64_t output_bytes = 262'144;   // GenAI
  Amount price = Amount::from_micros(10'000);  // per request, or per step for PipelineK

  // Throws Errc::Config.
  void validate() const;
  Json to_json() const;
};

// Defaults for each kind; GenAI is priced at 0.25 per request.
WorkloadSpec default_workload(WorkloadKind kind);

// Signed manifest advertising the workload as a service of `sa`.
CapabilityManifest workload_manifest(const WorkloadSpec& spec, const AgentIdentity& sa);
std::string workload_service_id(WorkloadKind kind);
// Request parameters a user agent sends for the n-th request.
Json workload_request_params(const WorkloadSpec& spec, std::uint64_t n);

struct WorkloadOutput {
  ExecutionLog log;
  std::optional<Json> inline_result;  // Light
  Cid output_cid;
  Bytes content;                      // bytes the output CID commits to
  std::vector<Cid> stored;            // every store put, in order
  std::int64_t end_ms = 0;            // output available to deliver
};

// Runs the workload on the simulated clock starting at now_ms. Store puts
// happen at their simulated times; end_ms includes upload completion.
WorkloadOutput execute_workload(const WorkloadSpec& spec, const ServiceRequest& request,
                                const Digest32& request_hash, const Digest32& quote_id,
                                ContentStore& store, std::int64_t now_ms);

}  // namespace agentosi
