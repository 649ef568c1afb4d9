#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "agentosi/audit.hpp"
#include "agentosi/bench.hpp"
#include "agentosi/config.hpp"
#include "agentosi/error.hpp"
#include "agentosi/session.hpp"
#include "agentosi/vectors.hpp"

namespace fs = std::filesystem;
using namespace agentosi;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct GlobalFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> workload;
  std::optional<std::int64_t> trials;
  std::optional<std::int64_t> concurrency;
  std::optional<std::int64_t> duration_s;
  std::optional<std::int64_t> block_time_ms;
  std::string out = "reports";
  bool audit_log = false;
};

RunConfig build_config(const GlobalFlags& f) {
  RunConfig c = resolve_config(f.config ? std::optional<fs::path>(*f.config) : std::nullopt);
  if (f.seed) c.seed = *f.seed;
  if (f.mode) c.mode = parse_session_mode(*f.mode);
  if (f.workload) c.workload = parse_workload_kind(*f.workload);
  if (f.trials) c.trials = *f.trials;
  if (f.concurrency) {
    c.concurrency = *f.concurrency;
    c.concurrency_levels = {*f.concurrency};
  }
  if (f.duration_s) c.duration_s = *f.duration_s;
  if (f.block_time_ms) c.block_time_ms = *f.block_time_ms;
  c.validate();
  return c;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Config, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_run_session(const GlobalFlags& f) {
  const RunConfig c = build_config(f);
  const std::string name = "session-" + std::string(workload_kind_name(c.workload)) + "-" +
                           std::string(session_mode_name(c.mode));
  SimulationRun run{name, simulate_session(c, c.workload, c.mode, c.seed)};
  const auto root = export_runs(f.out, c.seed, {&run}, f.audit_log);
  const auto& t = run.sim->transcript(0);
  std::cout << (root / name / "sessions" / t.session_id / "transcript.json").string() << "\n";
  std::cerr << t.state.str() << "\n";
  return t.state.settled() ? kOk : kFailure;
}

int cmd_bench(const GlobalFlags& f, const std::string& which) {
  const RunConfig c = build_config(f);
  BenchReport report;
  report.config = c;
  const bool all = which == "all";
  if (all || which == "cost") report.cost = bench_cost(c);
  if (all || which == "latency") report.latency = bench_latency(c);
  if (all || which == "throughput") report.throughput = bench_throughput(c);

  for (const auto& path : report.write(f.out)) std::cout << path.string() << "\n";
  std::vector<const SimulationRun*> runs;
  if (report.cost) {
    for (const auto& r : report.cost->runs) runs.push_back(&r);
  }
  if (report.latency) {
    for (const auto& r : report.latency->runs) runs.push_back(&r);
  }
  if (!runs.empty()) std::cout << export_runs(f.out, c.seed, runs, f.audit_log).string() << "\n";

  std::size_t failed = 0;
  for (const auto* t : report.transcripts()) failed += t->state.phase == SessionPhase::Failed ? 1 : 0;
  if (failed > 0) std::cerr << failed << " session(s) failed\n";
  return failed == 0 ? kOk : kFailure;
}

int cmd_verify(const std::string& dir) {
  const auto report = verify_run_directory(dir);
  if (report.runs == 0) {
    std::cerr << "no ledger_log.jsonl found under " << dir << "\n";
    return kUsage;
  }
  for (const auto& finding : report.findings) {
    std::cout << "FAIL " << finding.session_dir.string() << ": " << finding.reason << "\n";
  }
  std::cout << "runs=" << report.runs << " checked=" << report.sessions_checked
            << " skipped=" << report.sessions_skipped << " failures=" << report.findings.size() << "\n";
  return report.ok() ? kOk : kFailure;
}

int cmd_vectors(const std::string& action, const std::string& file, const GlobalFlags&) {
  if (action == "emit") {
    const Json inputs = file.empty() ? default_vector_inputs() : Json::parse(read_text(file));
    std::cout << emit_vectors(inputs).dump(2, ' ', false) << "\n";
    return kOk;
  }
  if (file.empty()) throw Error(Errc::Config, "vectors check needs a file");
  const auto bad = check_vectors(Json::parse(read_text(file)));
  for (const auto& line : bad) std::cout << "MISMATCH " << line << "\n";
  std::cout << (bad.empty() ? "vectors ok" : "vectors differ") << "\n";
  return bad.empty() ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-to-agent paid session simulator and benchmark harness"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags f;
  app.add_option("--config", f.config, "Config file (default: $AGENTOSI_CONFIG)");
  app.add_option("--seed", f.seed, "Base seed");
  app.add_option("--mode", f.mode, "agentosi | web3-baseline");
  app.add_option("--workload", f.workload, "light | pipeline | genai");
  app.add_option("--trials", f.trials, "Latency trials per workload");
  app.add_option("--concurrency", f.concurrency, "Single throughput concurrency level");
  app.add_option("--duration-s", f.duration_s, "Throughput measurement window (simulated s)");
  app.add_option("--block-time-ms", f.block_time_ms, "Block interval");
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  app.add_flag("--audit-log", f.audit_log, "Export the message audit log");

  auto* run = app.add_subcommand("run-session", "Run one session and export its transcript");
  std::string bench_which;
  auto* bench = app.add_subcommand("bench", "Run benchmarks and write report.json plus CSVs");
  bench->add_option("section", bench_which, "cost | latency | throughput | all")
      ->required()
      ->check(CLI::IsMember({"cost", "latency", "throughput", "all"}));
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Offline audit of an exported run directory");
  verify->add_option("dir", verify_dir, "Run directory")->required();
  std::string vec_action, vec_file;
  auto* vectors = app.add_subcommand("vectors", "Emit or check golden crypto vectors");
  vectors->add_option("action", vec_action, "emit | check")
      ->required()
      ->check(CLI::IsMember({"emit", "check"}));
  vectors->add_option("file", vec_file, "Vector file (inputs for emit, vectors for check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run_session(f);
    if (*bench) return cmd_bench(f, bench_which);
    if (*verify) return cmd_verify(verify_dir);
    if (*vectors) return cmd_vectors(vec_action, vec_file, f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::Config ? kUsage : kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
