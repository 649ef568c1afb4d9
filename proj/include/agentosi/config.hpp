#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agentosi/amount.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/content_store.hpp"
#include "agentosi/ledger.hpp"
#include "agentosi/messaging.hpp"
#include "agentosi/workload.hpp"

namespace agentosi {

enum class SessionMode { AgentOsi, Web3Baseline };
std::string_view session_mode_name(SessionMode m);  // agentosi, web3-baseline
SessionMode parse_session_mode(std::string_view name);

// How the release confirmation is attributed to session latency.
// Overlapped: the session ends when the user agent has verified the
// delivery; the release confirms in the background. Serial: the session
// ends at max(delivery verified, release confirmed).
enum class ReleaseAttribution { Overlapped, Serial };
std::string_view release_attribution_name(ReleaseAttribution a);
ReleaseAttribution parse_release_attribution(std::string_view name);

struct RunConfig {
  std::uint64_t seed = 42;
  SessionMode mode = SessionMode::AgentOsi;
  WorkloadKind workload = WorkloadKind::Light;
  std::int64_t trials = 100;
  std::int64_t concurrency = 1;
  std::vector<std::int64_t> concurrency_levels = {10, 50, 100, 250, 500};
  std::int64_t duration_s = 60;
  std::int64_t warmup_s = 30;

  // ledger
  std::int64_t block_time_ms = 2000;
  std::uint64_t chain_id = 31337;
  std::string escrow_ref = "escrow:agentosi-v1";
  GasSchedule gas_schedule;

  // bus and store
  LatencyModel bus_latency;
  UploadModel upload;

  // workloads
  WorkloadSpec light = default_workload(WorkloadKind::Light);
  WorkloadSpec pipeline = default_workload(WorkloadKind::PipelineK);
  WorkloadSpec genai = default_workload(WorkloadKind::GenAI);

  // caps
  double msg_cap_per_s = 50.0;
  double tx_cap_per_s = 40.0;

  // session
  std::int64_t quote_ttl_ms = 120'000;
  std::int64_t session_timeout_ms = 180'000;
  Amount ua_balance = Amount::from_units(1000);
  bool refund_on_failure = true;
  ReleaseAttribution attribution = ReleaseAttribution::Overlapped;

  // Throws Errc::Config.
  void validate() const;

  const WorkloadSpec& workload_spec(WorkloadKind kind) const;
  WorkloadSpec& workload_spec(WorkloadKind kind);
  // Inclusion cap per block implied by tx_cap_per_s; at least 1.
  std::uint64_t max_tx_per_block() const;
  LedgerConfig ledger_config() const;

  // Sections: ledger, bus, store, workloads, caps, gas_schedule, session,
  // bench. Every key is optional; unknown keys are rejected.
  Json to_json() const;
  // Overlays `j` onto `base`. Throws Errc::Config.
  static RunConfig from_json(const Json& j, RunConfig base);
  static RunConfig from_json(const Json& j);
};

// Throws Errc::Config if the file is unreadable or invalid.
RunConfig load_config(const std::filesystem::path& path);
// Loads `explicit_path` if given, else $AGENTOSI_CONFIG if set, else defaults.
RunConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace agentosi
