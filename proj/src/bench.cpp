#include "agentosi/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace agentosi {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Starts a session and, when it ends before `stop_ms`, the next one.
void chain_sessions(Simulation* sim, Address ua, Address sa, std::int64_t at_ms, std::int64_t stop_ms,
                    std::int64_t remaining) {
  sim->start_session(ua, sa, at_ms, {}, [=](std::size_t, std::int64_t end_ms) {
    if (remaining > 1 && end_ms < stop_ms) chain_sessions(sim, ua, sa, end_ms, stop_ms, remaining - 1);
  });
}

ComponentStats component_stats(const std::vector<const PhaseTimings*>& samples) {
  std::vector<double> msg, conf, exec, total, cshare, eshare, mshare;
  for (const auto* t : samples) {
    msg.push_back(static_cast<double>(t->messaging_ms));
    conf.push_back(static_cast<double>(t->confirmation_ms));
    exec.push_back(static_cast<double>(t->execution_delivery_ms));
    total.push_back(static_cast<double>(t->total_ms));
    const double tot = t->total_ms > 0 ? static_cast<double>(t->total_ms) : 1.0;
    cshare.push_back(static_cast<double>(t->confirmation_ms) / tot);
    eshare.push_back(static_cast<double>(t->execution_delivery_ms) / tot);
    mshare.push_back(static_cast<double>(t->messaging_ms) / tot);
  }
  return ComponentStats{summarize(msg),   summarize(conf),   summarize(exec),  summarize(total),
                        summarize(cshare), summarize(eshare), summarize(mshare)};
}

void append_runs(std::vector<const SessionTranscript*>& out, const std::vector<SimulationRun>& runs) {
  for (const auto& r : runs) {
    for (const auto* t : r.sim->transcripts()) out.push_back(t);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view section, std::uint64_t index) {
  const Digest32 d = sha256(canonicalize(Json{{"base", base}, {"section", section}, {"index", index}}));
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < 8; ++i) s = (s << 8) | d.raw()[i];
  return s;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::Io, "failed to write " + path.string());
}

// ---- cost -----------------------------------------------------------------

Json CostSection::to_json() const {
  return Json{{"registerGas", {{"agentosi", register_gas_agentosi}, {"web3-baseline", register_gas_baseline}}},
              {"agentosiSessionGas", agentosi_session_gas},
              {"baselineSessionGas", baseline_session_gas},
              {"web2SessionGas", web2_session_gas},
              {"reductionPct", reduction_pct}};
}

std::string CostSection::csv() const {
  return "register_gas_agentosi,register_gas_baseline,agentosi_session_gas,baseline_session_gas,"
         "web2_session_gas,reduction_pct\n" +
         std::to_string(register_gas_agentosi) + "," + std::to_string(register_gas_baseline) + "," +
         std::to_string(agentosi_session_gas) + "," + std::to_string(baseline_session_gas) + "," +
         std::to_string(web2_session_gas) + "," + fmt(reduction_pct) + "\n";
}

CostSection bench_cost(const RunConfig& config) {
  CostSection out;
  for (auto mode : {SessionMode::AgentOsi, SessionMode::Web3Baseline}) {
    RunConfig c = config;
    c.mode = mode;
    const std::string name = "cost-light-" + std::string(session_mode_name(mode));
    auto sim = std::make_unique<Simulation>(c, derive_seed(c.seed, name, 0));
    const Address sa = sim->add_service(c.light, derive_seed(c.seed, name + "/sa", 0));
    const Address ua = sim->add_user(derive_seed(c.seed, name + "/ua", 0), c.ua_balance);
    std::uint64_t register_gas = 0;
    for (const auto& r : sim->register_all()) {
      if (r.sender == ua) register_gas = r.gas_used;
    }
    sim->start_session(ua, sa, sim->now());
    sim->run();
    const SessionTranscript& t = sim->transcript(0);
    const std::uint64_t session_gas = t.state.settled() ? t.gas_total() : 0;
    if (mode == SessionMode::AgentOsi) {
      out.register_gas_agentosi = register_gas;
      out.agentosi_session_gas = session_gas;
    } else {
      out.register_gas_baseline = register_gas;
      out.baseline_session_gas = session_gas;
    }
    out.runs.push_back(SimulationRun{name, std::move(sim)});
  }
  if (out.baseline_session_gas > 0) {
    out.reduction_pct = 100.0 *
                        static_cast<double>(out.baseline_session_gas - std::min(out.baseline_session_gas,
                                                                                out.agentosi_session_gas)) /
                        static_cast<double>(out.baseline_session_gas);
  }
  return out;
}

// ---- latency --------------------------------------------------------------

Json ComponentStats::to_json() const {
  return Json{{"messagingMs", messaging_ms.to_json()},
              {"confirmationMs", confirmation_ms.to_json()},
              {"executionDeliveryMs", execution_delivery_ms.to_json()},
              {"totalMs", total_ms.to_json()},
              {"confirmationShare", confirmation_share.to_json()},
              {"executionShare", execution_share.to_json()},
              {"messagingShare", messaging_share.to_json()}};
}

const LatencyWorkload& LatencySection::workload(WorkloadKind kind) const {
  for (const auto& w : workloads) {
    if (w.kind == kind) return w;
  }
  throw Error(Errc::NotFound, "workload not benchmarked");
}

Json LatencySection::to_json() const {
  Json ws = Json::object();
  for (const auto& w : workloads) {
    ws[std::string(workload_kind_name(w.kind))] = Json{{"trials", w.trials},
                                                       {"settled", w.settled},
                                                       {"overlapped", w.overlapped.to_json()},
                                                       {"serial", w.serial.to_json()}};
  }
  return Json{{"releaseAttribution", release_attribution_name(attribution)}, {"workloads", ws}};
}

std::string LatencySection::csv() const {
  std::string out = "workload,attribution,component,median,p10,p90\n";
  for (const auto& w : workloads) {
    for (auto a : {ReleaseAttribution::Overlapped, ReleaseAttribution::Serial}) {
      const ComponentStats& s = w.under(a);
      const std::pair<const char*, const Summary*> rows[] = {
          {"messaging_ms", &s.messaging_ms},
          {"confirmation_ms", &s.confirmation_ms},
          {"execution_delivery_ms", &s.execution_delivery_ms},
          {"total_ms", &s.total_ms},
          {"confirmation_share", &s.confirmation_share},
          {"execution_share", &s.execution_share},
          {"messaging_share", &s.messaging_share},
      };
      for (const auto& [name, sum] : rows) {
        out += std::string(workload_kind_name(w.kind)) + "," + std::string(release_attribution_name(a)) +
               "," + name + "," + fmt(sum->median) + "," + fmt(sum->p10) + "," + fmt(sum->p90) + "\n";
      }
    }
  }
  return out;
}

LatencySection bench_latency(const RunConfig& config, const std::vector<WorkloadKind>& workloads) {
  LatencySection out;
  out.attribution = config.attribution;
  for (auto kind : workloads) {
    const std::string name = "latency-" + std::string(workload_kind_name(kind));
    auto sim = std::make_unique<Simulation>(config, derive_seed(config.seed, name, 0));
    const Address sa = sim->add_service(config.workload_spec(kind), derive_seed(config.seed, name + "/sa", 0));
    const Address ua = sim->add_user(derive_seed(config.seed, name + "/ua", 0), config.ua_balance);
    sim->register_all();
    chain_sessions(sim.get(), ua, sa, sim->now(), INT64_MAX, config.trials);
    sim->run();

    LatencyWorkload w;
    w.kind = kind;
    w.trials = sim->session_count();
    std::vector<const PhaseTimings*> overlapped, serial;
    for (const auto* t : sim->transcripts()) {
      if (!t->state.settled()) continue;
      ++w.settled;
      overlapped.push_back(&t->overlapped);
      serial.push_back(&t->serial);
    }
    w.overlapped = component_stats(overlapped);
    w.serial = component_stats(serial);
    out.workloads.push_back(w);
    out.runs.push_back(SimulationRun{name, std::move(sim)});
  }
  return out;
}

// ---- throughput -----------------------------------------------------------

double ThroughputLevel::bound_error() const {
  const double bound = tx_per_s / 2.0;
  return bound > 0 ? std::abs(sessions_per_s - bound) / bound : 0.0;
}

Json ThroughputLevel::to_json() const {
  return Json{{"concurrency", concurrency},
              {"msgPerS", msg_per_s},
              {"busMsgPerS", bus_msg_per_s},
              {"peakMsgPerS", peak_msg_per_s},
              {"txPerS", tx_per_s},
              {"sessionsPerS", sessions_per_s},
              {"boundError", bound_error()},
              {"sessionsStarted", sessions_started},
              {"sessionsFailed", sessions_failed}};
}

Json ThroughputSection::to_json() const {
  Json levels_json = Json::array();
  for (const auto& l : levels) levels_json.push_back(l.to_json());
  return Json{{"caps", {{"msgPerS", msg_cap_per_s}, {"txPerS", tx_cap_per_s}}},
              {"durationS", duration_s},
              {"warmupS", warmup_s},
              {"workload", workload_kind_name(workload)},
              {"levels", levels_json}};
}

std::string ThroughputSection::csv() const {
  std::string out = "concurrency,msg_per_s,bus_msg_per_s,peak_msg_per_s,tx_per_s,sessions_per_s,bound_error\n";
  for (const auto& l : levels) {
    out += std::to_string(l.concurrency) + "," + fmt(l.msg_per_s) + "," + fmt(l.bus_msg_per_s) + "," +
           fmt(l.peak_msg_per_s) + "," + fmt(l.tx_per_s) + "," + fmt(l.sessions_per_s) + "," +
           fmt(l.bound_error()) + "\n";
  }
  return out;
}

ThroughputLevel measure_throughput(const RunConfig& config, std::int64_t concurrency,
                                   std::vector<SimulationRun>* keep) {
  const std::string name = "throughput-" + std::to_string(concurrency);
  auto sim = std::make_unique<Simulation>(config, derive_seed(config.seed, name, 0));
  const Address sa = sim->add_service(config.workload_spec(config.workload), derive_seed(config.seed, name + "/sa", 0));
  std::vector<Address> users;
  for (std::int64_t i = 0; i < concurrency; ++i) {
    users.push_back(sim->add_user(derive_seed(config.seed, name + "/ua", static_cast<std::uint64_t>(i)),
                                  config.ua_balance));
  }
  sim->register_all();

  // Arrivals are spread at the settlement rate so the load ramps up
  // without a synchronized burst.
  const std::int64_t t0 = sim->now();
  const double session_rate = config.tx_cap_per_s / 2.0;
  const auto stagger = static_cast<std::int64_t>(std::ceil(1000.0 / session_rate));
  const std::int64_t w0 = t0 + config.warmup_s * 1000;
  const std::int64_t w1 = w0 + config.duration_s * 1000;
  for (std::size_t i = 0; i < users.size(); ++i) {
    chain_sessions(sim.get(), users[i], sa, t0 + static_cast<std::int64_t>(i) * stagger, w1, INT64_MAX);
  }
  sim->run_until(w1);

  ThroughputLevel level;
  level.concurrency = concurrency;
  const double secs = static_cast<double>(config.duration_s);
  auto in_window = [&](std::int64_t t) { return t >= w0 && t < w1; };

  std::vector<std::uint64_t> buckets(static_cast<std::size_t>(config.duration_s), 0);
  std::uint64_t sa_msgs = 0;
  for (auto t : sim->deliveries_to(sa)) {
    if (!in_window(t)) continue;
    ++sa_msgs;
    ++buckets[static_cast<std::size_t>((t - w0) / 1000)];
  }
  std::uint64_t bus_msgs = sa_msgs;
  for (const auto& u : users) {
    for (auto t : sim->deliveries_to(u)) bus_msgs += in_window(t) ? 1 : 0;
  }
  std::uint64_t txs = 0;
  for (const auto& r : sim->ledger().all_receipts()) txs += in_window(r.block_timestamp_ms) ? 1 : 0;
  std::uint64_t settled = 0;
  for (const auto* t : sim->transcripts()) {
    if (t->state.settled() && in_window(t->settled_ms)) ++settled;
    if (t->state.phase == SessionPhase::Failed) ++level.sessions_failed;
  }
  level.sessions_started = sim->session_count();
  level.msg_per_s = static_cast<double>(sa_msgs) / secs;
  level.bus_msg_per_s = static_cast<double>(bus_msgs) / secs;
  level.peak_msg_per_s = static_cast<double>(*std::max_element(buckets.begin(), buckets.end()));
  level.tx_per_s = static_cast<double>(txs) / secs;
  level.sessions_per_s = static_cast<double>(settled) / secs;
  if (keep) keep->push_back(SimulationRun{name, std::move(sim)});
  return level;
}

ThroughputSection bench_throughput(const RunConfig& config) {
  ThroughputSection out;
  out.msg_cap_per_s = config.msg_cap_per_s;
  out.tx_cap_per_s = config.tx_cap_per_s;
  out.duration_s = config.duration_s;
  out.warmup_s = config.warmup_s;
  out.workload = config.workload;
  for (auto c : config.concurrency_levels) out.levels.push_back(measure_throughput(config, c, &out.runs));
  return out;
}

// ---- report ---------------------------------------------------------------

std::vector<const SessionTranscript*> BenchReport::transcripts() const {
  std::vector<const SessionTranscript*> out;
  if (cost) append_runs(out, cost->runs);
  if (latency) append_runs(out, latency->runs);
  if (throughput) append_runs(out, throughput->runs);
  return out;
}

Digest32 BenchReport::transcript_set_hash() const { return agentosi::transcript_set_hash(transcripts()); }

Json BenchReport::to_json() const {
  const auto all = transcripts();
  std::size_t settled = 0;
  for (const auto* t : all) settled += t->state.settled() ? 1 : 0;
  Json j{{"schemaVersion", kReportSchemaVersion},
         {"seed", config.seed},
         {"config", config.to_json()},
         {"sessions", {{"count", all.size()}, {"settled", settled}}},
         {"transcriptSetHash", agentosi::transcript_set_hash(all).hex()}};
  if (cost) j["cost"] = cost->to_json();
  if (latency) j["latency"] = latency->to_json();
  if (throughput) j["throughput"] = throughput->to_json();
  return j;
}

std::vector<std::filesystem::path> BenchReport::write(const std::filesystem::path& out_dir) const {
  std::vector<std::filesystem::path> files;
  auto put = [&](const std::string& name, const std::string& content) {
    write_file(out_dir / name, content);
    files.push_back(out_dir / name);
  };
  put("report.json", canonicalize(to_json()) + "\n");
  if (cost) put("cost.csv", cost->csv());
  if (latency) put("latency.csv", latency->csv());
  if (throughput) put("throughput.csv", throughput->csv());
  return files;
}

// ---- export ---------------------------------------------------------------

void export_session(const std::filesystem::path& dir, const SessionTranscript& t) {
  std::filesystem::create_directories(dir);
  write_file(dir / "transcript.json", canonicalize(t.to_json()));
  if (t.request) write_file(dir / "request.json", canonicalize(t.request->to_json()));
  if (t.quote) write_file(dir / "quote.json", canonicalize(t.quote->to_json()));
  if (t.receipt) write_file(dir / "receipt.json", canonicalize(t.receipt->to_json()));
  if (t.provenance) write_file(dir / "provenance.json", canonicalize(t.provenance->to_json()));
  if (t.exec_log) write_file(dir / "exec_log.json", canonicalize(t.exec_log->to_json()));
  if (!t.delivered.empty()) {
    write_file(dir / "delivered.bin",
               std::string_view(reinterpret_cast<const char*>(t.delivered.data()), t.delivered.size()));
  }
}

std::filesystem::path export_runs(const std::filesystem::path& out_dir, std::uint64_t seed,
                                  const std::vector<const SimulationRun*>& runs, bool audit_log) {
  const auto root = out_dir / ("run-" + std::to_string(seed));
  for (const auto* run : runs) {
    const auto dir = root / run->name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir / "sessions");
    write_file(dir / "ledger_log.jsonl", run->sim->ledger().export_log_jsonl());
    for (const auto* t : run->sim->transcripts()) export_session(dir / "sessions" / t->session_id, *t);
    if (audit_log) {
      std::string lines;
      for (const auto& e : run->sim->bus().audit_log()) lines += canonicalize(e.to_json()) + "\n";
      write_file(dir / "audit.jsonl", lines);
    }
  }
  return root;
}

}  // namespace agentosi
