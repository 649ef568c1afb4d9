#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "agentosi/audit.hpp"
#include "agentosi/bench.hpp"
#include "scenarios.hpp"

using namespace agentosi;
namespace fs = std::filesystem;

namespace {

int failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int n, const std::string& title, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << n << " " << title << ": " << detail << std::endl;
  failures += pass ? 0 : 1;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void flip_byte(const fs::path& p, std::size_t offset) {
  std::string s = read_file(p);
  s[offset] = static_cast<char>(s[offset] ^ 0x01);
  write_file(p, s);
}

void criterion_cost() {
  Timer timer;
  const auto c = bench_cost(RunConfig{});
  const double secs = timer.seconds();
  const bool pass = c.register_gas_agentosi == 46'000 && c.register_gas_baseline == 46'000 &&
                    c.agentosi_session_gas == 159'000 && c.baseline_session_gas == 326'000 &&
                    std::abs(c.reduction_pct - 51.2) <= 0.5 && secs < 1.0;
  report(1, "cost", pass,
         "register " + std::to_string(c.register_gas_agentosi) + "/" + std::to_string(c.register_gas_baseline) +
             ", session " + std::to_string(c.agentosi_session_gas) + " vs " +
             std::to_string(c.baseline_session_gas) + ", reduction " + fmt(c.reduction_pct, 2) + "%, " +
             fmt(secs) + " s");
}

void criterion_latency() {
  RunConfig cfg;
  cfg.trials = 100;
  Timer timer;
  const auto lat = bench_latency(cfg);
  const double secs = timer.seconds();
  const auto& light = lat.workload(WorkloadKind::Light).overlapped;
  const auto& genai = lat.workload(WorkloadKind::GenAI).overlapped;
  bool messaging_ok = true;
  bool all_settled = true;
  std::string msg;
  for (const auto& w : lat.workloads) {
    messaging_ok = messaging_ok && w.overlapped.messaging_ms.median <= 100;
    all_settled = all_settled && w.settled == w.trials;
    msg += std::string(workload_kind_name(w.kind)) + " " + fmt(w.overlapped.messaging_ms.median, 0) + " ms ";
  }
  const bool exec_largest = genai.execution_delivery_ms.median > genai.confirmation_ms.median &&
                            genai.execution_delivery_ms.median > genai.messaging_ms.median;
  const bool pass = light.confirmation_share.median >= 0.90 && genai.confirmation_share.median >= 0.20 &&
                    genai.confirmation_share.median <= 0.40 && exec_largest && messaging_ok && all_settled &&
                    secs < 10.0;
  report(2, "latency decomposition", pass,
         "light confirmation share " + fmt(light.confirmation_share.median) + ", genai share " +
             fmt(genai.confirmation_share.median) + ", genai execution " +
             fmt(genai.execution_delivery_ms.median, 0) + " ms, messaging " + msg + "(" + fmt(secs) + " s)");
}

void criterion_confirmation_law() {
  Ledger ledger(LedgerConfig{});
  Rng rng(2024);
  const auto sender = AgentIdentity::from_seed(1).address();
  const std::int64_t bt = ledger.block_time_ms();
  double sum = 0;
  std::int64_t max_wait = 0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const std::int64_t t = static_cast<std::int64_t>(i) * bt + rng.uniform_int(0, bt - 1);
    ledger.submit(ledger.anchor_tx(TxKind::AnchorOrder, sender, Digest32{}), t);
    for (const auto& r : ledger.produce_blocks_until(t + bt)) {
      sum += static_cast<double>(r.confirmation_wait_ms());
      max_wait = std::max(max_wait, r.confirmation_wait_ms());
    }
  }
  const double mean = sum / n;
  const bool pass = std::abs(mean - bt / 2.0) <= 0.05 * bt / 2.0 && max_wait <= bt;
  report(3, "confirmation-latency law", pass,
         "mean wait " + fmt(mean, 1) + " ms (target " + fmt(bt / 2.0, 0) + " +/- 5%), max " +
             std::to_string(max_wait) + " ms over " + std::to_string(n) + " submissions");
}

void criterion_throughput() {
  RunConfig cfg;
  Timer timer;
  const auto tp = bench_throughput(cfg);
  const double secs = timer.seconds();
  bool pass = secs < 30.0;
  std::string detail;
  for (const auto& l : tp.levels) {
    pass = pass && l.bound_error() <= 0.15 && l.peak_msg_per_s <= cfg.msg_cap_per_s;
    if (l.concurrency == 500) {
      pass = pass && l.tx_per_s >= 35 && l.tx_per_s <= 40 && l.sessions_per_s >= 17 && l.sessions_per_s <= 20;
    }
    detail += std::to_string(l.concurrency) + ": " + fmt(l.tx_per_s, 1) + " tx/s " + fmt(l.sessions_per_s, 2) +
              " sess/s err " + fmt(l.bound_error(), 3) + "; ";
  }
  report(4, "throughput bound", pass, detail + "(" + fmt(secs) + " s)");
}

void criterion_safety() {
  const auto results = testing::run_safety_suite();
  bool pass = true;
  std::string detail;
  for (const auto& r : results) {
    pass = pass && r.ok();
    if (!r.ok()) detail += r.name + " gave " + r.state + " expected " + r.expected + "; ";
  }
  report(5, "safety suite", pass,
         pass ? std::to_string(results.size()) + " adversarial drivers rejected with expected reasons" : detail);
}

void criterion_conservation() {
  const auto r = testing::run_mixed_load(1'200, 77);
  const bool pass = r.sessions >= 1'000 && r.conservation_violations == 0 && r.double_releases == 0 &&
                    r.unsafe_settlements == 0 && r.failed > 0;
  report(6, "conservation", pass,
         std::to_string(r.sessions) + " sessions (" + std::to_string(r.settled) + " settled, " +
             std::to_string(r.failed) + " failed), " + std::to_string(r.conservation_checks) + " checks, " +
             std::to_string(r.conservation_violations) + " violations");
}

BenchReport bench_all(const RunConfig& cfg) {
  BenchReport r;
  r.config = cfg;
  r.cost = bench_cost(cfg);
  r.latency = bench_latency(cfg);
  r.throughput = bench_throughput(cfg);
  return r;
}

void criterion_determinism_and_audit(const fs::path& out) {
  RunConfig cfg;
  cfg.seed = 42;
  const auto a = bench_all(cfg);
  const auto b = bench_all(cfg);
  a.write(out / "a");
  b.write(out / "b");
  const bool same_bytes = read_file(out / "a" / "report.json") == read_file(out / "b" / "report.json");
  const bool same_hash = a.transcript_set_hash() == b.transcript_set_hash();
  report(7, "determinism", same_bytes && same_hash,
         std::string("report.json ") + (same_bytes ? "identical" : "differs") + ", transcript-set hash " +
             a.transcript_set_hash().hex().substr(0, 16) + (same_hash ? " matches" : " differs"));

  std::vector<const SimulationRun*> runs;
  for (const auto& r : a.cost->runs) runs.push_back(&r);
  for (const auto& r : a.latency->runs) runs.push_back(&r);
  const auto root = export_runs(out / "export", cfg.seed, runs, false);
  const auto honest = verify_run_directory(root);

  std::vector<fs::path> targets;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const auto name = e.path().filename();
    if (name == "provenance.json" || name == "delivered.bin") targets.push_back(e.path());
  }
  std::sort(targets.begin(), targets.end());
  Rng rng(8);
  std::size_t tried = 0, caught = 0;
  for (std::size_t i = 0; i < targets.size(); i += std::max<std::size_t>(1, targets.size() / 40)) {
    const auto& p = targets[i];
    const auto off = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(fs::file_size(p)) - 1));
    flip_byte(p, off);
    ++tried;
    AuditReport r;
    audit_run(p.parent_path().parent_path().parent_path(), r);
    caught += r.findings.empty() ? 0 : 1;
    flip_byte(p, off);
  }
  const bool restored = verify_run_directory(root).ok();
  report(8, "offline audit", honest.ok() && caught == tried && tried > 0 && restored,
         std::to_string(honest.sessions_checked) + " sessions verified from disk, " + std::to_string(caught) + "/" +
             std::to_string(tried) + " single-byte tamperings rejected");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "agentosi-acceptance";
  fs::remove_all(out);
  fs::create_directories(out);
  Timer total;
  criterion_cost();
  criterion_latency();
  criterion_confirmation_law();
  criterion_throughput();
  criterion_safety();
  criterion_conservation();
  criterion_determinism_and_audit(out);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << " (" << fmt(total.seconds(), 1)
            << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
