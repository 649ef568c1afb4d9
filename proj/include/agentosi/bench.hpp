#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentosi/config.hpp"
#include "agentosi/metrics.hpp"
#include "agentosi/session.hpp"

namespace agentosi {

inline constexpr int kReportSchemaVersion = 1;

// Stable per-run seed for a named part of a benchmark.
std::uint64_t derive_seed(std::uint64_t base, std::string_view section, std::uint64_t index);

// A finished simulation kept for export and transcript hashing.
struct SimulationRun {
  std::string name;  // export directory name, e.g. "latency-light"
  std::unique_ptr<Simulation> sim;
};

struct CostSection {
  std::uint64_t register_gas_agentosi = 0;
  std::uint64_t register_gas_baseline = 0;
  std::uint64_t agentosi_session_gas = 0;
  std::uint64_t baseline_session_gas = 0;
  std::uint64_t web2_session_gas = 0;
  double reduction_pct = 0;
  std::vector<SimulationRun> runs;

  Json to_json() const;
  std::string csv() const;
};

struct ComponentStats {
  Summary messaging_ms;
  Summary confirmation_ms;
  Summary execution_delivery_ms;
  Summary total_ms;
  Summary confirmation_share;
  Summary execution_share;
  Summary messaging_share;

  Json to_json() const;
};

struct LatencyWorkload {
  WorkloadKind kind = WorkloadKind::Light;
  std::size_t trials = 0;
  std::size_t settled = 0;
  ComponentStats overlapped;
  ComponentStats serial;

  const ComponentStats& under(ReleaseAttribution a) const {
    return a == ReleaseAttribution::Overlapped ? overlapped : serial;
  }
};

struct LatencySection {
  ReleaseAttribution attribution = ReleaseAttribution::Overlapped;
  std::vector<LatencyWorkload> workloads;
  std::vector<SimulationRun> runs;

  const LatencyWorkload& workload(WorkloadKind kind) const;
  Json to_json() const;
  std::string csv() const;
};

struct ThroughputLevel {
  std::int64_t concurrency = 0;
  double msg_per_s = 0;       // deliveries into the service agent's inbox
  double bus_msg_per_s = 0;   // deliveries on the whole bus
  double peak_msg_per_s = 0;  // busiest one-second bucket of the service inbox
  double tx_per_s = 0;        // confirmed transactions
  double sessions_per_s = 0;  // sessions reaching Settled
  std::size_t sessions_started = 0;
  std::size_t sessions_failed = 0;

  // |sessions/s - tx/s / 2| / (tx/s / 2)
  double bound_error() const;
  Json to_json() const;
};

struct ThroughputSection {
  double msg_cap_per_s = 0;
  double tx_cap_per_s = 0;
  std::int64_t duration_s = 0;
  std::int64_t warmup_s = 0;
  WorkloadKind workload = WorkloadKind::Light;
  std::vector<ThroughputLevel> levels;
  std::vector<SimulationRun> runs;

  Json to_json() const;
  std::string csv() const;
};

CostSection bench_cost(const RunConfig& config);
LatencySection bench_latency(const RunConfig& config,
                             const std::vector<WorkloadKind>& workloads = {
                                 WorkloadKind::Light, WorkloadKind::PipelineK, WorkloadKind::GenAI});
ThroughputSection bench_throughput(const RunConfig& config);
// One load test at a single concurrency level.
ThroughputLevel measure_throughput(const RunConfig& config, std::int64_t concurrency,
                                   std::vector<SimulationRun>* keep = nullptr);

struct BenchReport {
  RunConfig config;
  std::optional<CostSection> cost;
  std::optional<LatencySection> latency;
  std::optional<ThroughputSection> throughput;

  std::vector<const SessionTranscript*> transcripts() const;
  Digest32 transcript_set_hash() const;
  Json to_json() const;

  // report.json plus one CSV per section present. Returns the files written.
  std::vector<std::filesystem::path> write(const std::filesystem::path& out_dir) const;
};

// Writes <out>/run-<seed>/<run name>/ for each run: ledger_log.jsonl,
// sessions/<id>/{transcript,request,quote,receipt,provenance,exec_log}.json
// and delivered.bin, plus audit.jsonl when `audit_log` is set.
std::filesystem::path export_runs(const std::filesystem::path& out_dir, std::uint64_t seed,
                                  const std::vector<const SimulationRun*>& runs, bool audit_log);

// Writes the files of one session into `dir`.
void export_session(const std::filesystem::path& dir, const SessionTranscript& t);

void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace agentosi
