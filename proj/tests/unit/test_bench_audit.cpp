#include <gtest/gtest.h>

#include <fstream>

#include "agentosi/audit.hpp"
#include "agentosi/bench.hpp"
#include "test_support.hpp"

using namespace agentosi;
namespace fs = std::filesystem;

namespace {

void flip_byte(const fs::path& p, std::size_t offset) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ 0x01));
}

fs::path first_session(const fs::path& run) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(run / "sessions")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs.at(0);
}

}  // namespace

TEST(Bench, DeriveSeedStable) {
  EXPECT_EQ(derive_seed(42, "latency-light", 3), derive_seed(42, "latency-light", 3));
  EXPECT_NE(derive_seed(42, "latency-light", 3), derive_seed(42, "latency-light", 4));
  EXPECT_NE(derive_seed(42, "latency-light", 3), derive_seed(43, "latency-light", 3));
}

TEST(Bench, CostSection) {
  const auto cost = bench_cost(RunConfig{});
  EXPECT_EQ(cost.register_gas_agentosi, 46'000u);
  EXPECT_EQ(cost.register_gas_baseline, 46'000u);
  EXPECT_EQ(cost.agentosi_session_gas, 159'000u);
  EXPECT_EQ(cost.baseline_session_gas, 326'000u);
  EXPECT_EQ(cost.web2_session_gas, 0u);
  EXPECT_NEAR(cost.reduction_pct, 51.2, 0.1);
  EXPECT_NE(cost.csv().find('\n'), std::string::npos);
}

TEST(Bench, CostScaleInvariant) {
  RunConfig c;
  c.gas_schedule = c.gas_schedule.scaled(0.5);
  const auto half = bench_cost(c);
  EXPECT_EQ(half.agentosi_session_gas, 79'500u);
  EXPECT_DOUBLE_EQ(half.reduction_pct, bench_cost(RunConfig{}).reduction_pct);
}

TEST(Bench, SmallLatencyRun) {
  RunConfig c;
  c.trials = 5;
  const auto lat = bench_latency(c, {WorkloadKind::Light});
  ASSERT_EQ(lat.workloads.size(), 1u);
  EXPECT_EQ(lat.workloads[0].settled, 5u);
  EXPECT_EQ(lat.workloads[0].overlapped.total_ms.n, 5u);
  EXPECT_NE(lat.csv().find("workload"), std::string::npos);
}

TEST(Bench, ReportWritesFiles) {
  RunConfig c;
  c.trials = 3;
  BenchReport report;
  report.config = c;
  report.cost = bench_cost(c);
  report.latency = bench_latency(c, {WorkloadKind::Light});
  const auto dir = agentosi::testing::scratch_dir("report");
  const auto files = report.write(dir);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "cost.csv"));
  EXPECT_TRUE(fs::exists(dir / "latency.csv"));
  EXPECT_FALSE(fs::exists(dir / "throughput.csv"));
  const auto j = report.to_json();
  EXPECT_EQ(j.at("schemaVersion"), 1);
  EXPECT_EQ(j.at("transcriptSetHash"), report.transcript_set_hash().hex());
}

TEST(Audit, AcceptsHonestAndRejectsTampering) {
  RunConfig c;
  c.trials = 3;
  const auto lat = bench_latency(c, {WorkloadKind::Light, WorkloadKind::GenAI});
  const auto dir = agentosi::testing::scratch_dir("audit");
  std::vector<const SimulationRun*> runs;
  for (const auto& r : lat.runs) runs.push_back(&r);
  const auto root = export_runs(dir, c.seed, runs, true);
  auto report = verify_run_directory(root);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.runs, 2u);
  EXPECT_EQ(report.sessions_checked, 6u);
  EXPECT_TRUE(fs::exists(root / "latency-light" / "audit.jsonl"));

  const auto genai = first_session(root / "latency-genai");
  flip_byte(genai / "delivered.bin", 1000);
  report = verify_run_directory(root);
  ASSERT_EQ(report.findings.size(), 1u);
  EXPECT_NE(report.findings[0].reason.find("CidMismatch"), std::string::npos);
  flip_byte(genai / "delivered.bin", 1000);

  const auto light = first_session(root / "latency-light");
  const auto prov = light / "provenance.json";
  const auto size = fs::file_size(prov);
  for (std::size_t off : {std::size_t{5}, size / 2, size - 3}) {
    flip_byte(prov, off);
    EXPECT_FALSE(verify_run_directory(root).ok()) << "offset " << off;
    flip_byte(prov, off);
  }
  EXPECT_TRUE(verify_run_directory(root).ok());
}

TEST(Audit, EmptyDirectoryFindsNothing) {
  const auto report = verify_run_directory(agentosi::testing::scratch_dir("audit-empty"));
  EXPECT_EQ(report.runs, 0u);
  EXPECT_FALSE(report.ok());
}

TEST(Audit, LogSourceParses) {
  const auto t = run_session(RunConfig{}, WorkloadKind::Light, SessionMode::AgentOsi, 2);
  auto sim = simulate_session(RunConfig{}, WorkloadKind::Light, SessionMode::AgentOsi, 2);
  const auto log = LogReceiptSource::parse(sim->ledger().export_log_jsonl());
  EXPECT_EQ(log.all_receipts().size(), sim->ledger().all_receipts().size());
  const auto& tr = sim->transcript(0);
  EXPECT_TRUE(log.find_receipt(tr.receipt->tx_hash).has_value());
  EXPECT_EQ(log.release_evidence(tr.receipt->event.quote_id), tr.release_evidence);
  EXPECT_EQ(canonicalize(t.to_json()), canonicalize(tr.to_json()));
}
