#include "agentosi/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace agentosi {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::Config, what); }

std::int64_t as_int(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) bad("'" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

double as_number(const Json& v, const std::string& key) {
  if (!v.is_number()) bad("'" + key + "' must be a number");
  return v.get<double>();
}

bool as_bool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) bad("'" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& key) {
  if (!v.is_string()) bad("'" + key + "' must be a string");
  return v.get<std::string>();
}

Amount as_amount(const Json& v, const std::string& key) {
  try {
    return Amount::parse(as_string(v, key));
  } catch (const Error& e) {
    bad("'" + key + "': " + e.what());
  }
}

// Calls f(key, value) for every member; f returns false for unknown keys.
template <class F>
void each(const Json& obj, const std::string& section, F&& f) {
  if (!obj.is_object()) bad("section '" + section + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!f(k, v)) bad("unknown key '" + section + "." + k + "'");
  }
}

void read_workload(const Json& obj, const std::string& section, WorkloadSpec& w) {
  each(obj, section, [&](const std::string& k, const Json& v) {
    const std::string key = section + "." + k;
    if (k == "price") w.price = as_amount(v, key);
    else if (w.kind == WorkloadKind::Light && k == "overheadMs") w.overhead_ms = as_int(v, key);
    else if (w.kind == WorkloadKind::PipelineK && k == "k") w.k = as_int(v, key);
    else if (w.kind == WorkloadKind::PipelineK && k == "stepMs") w.step_ms = as_int(v, key);
    else if (w.kind == WorkloadKind::PipelineK && k == "artifactBytes") w.artifact_bytes = as_int(v, key);
    else if (w.kind == WorkloadKind::GenAI && k == "execMs") w.exec_ms = as_int(v, key);
    else if (w.kind == WorkloadKind::GenAI && k == "outputBytes") w.output_bytes = as_int(v, key);
    else return false;
    return true;
  });
}

Json workload_json(const WorkloadSpec& w) {
  Json j = w.to_json();
  j.erase("kind");
  j["price"] = w.price.to_string();
  return j;
}

}  // namespace

std::string_view session_mode_name(SessionMode m) {
  return m == SessionMode::AgentOsi ? "agentosi" : "web3-baseline";
}

SessionMode parse_session_mode(std::string_view name) {
  if (name == "agentosi") return SessionMode::AgentOsi;
  if (name == "web3-baseline") return SessionMode::Web3Baseline;
  bad("unknown mode '" + std::string(name) + "'");
}

std::string_view release_attribution_name(ReleaseAttribution a) {
  return a == ReleaseAttribution::Overlapped ? "overlapped" : "serial";
}

ReleaseAttribution parse_release_attribution(std::string_view name) {
  if (name == "overlapped") return ReleaseAttribution::Overlapped;
  if (name == "serial") return ReleaseAttribution::Serial;
  bad("unknown release attribution '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (trials < 1) bad("trials must be >= 1");
  if (concurrency < 1) bad("concurrency must be >= 1");
  if (concurrency_levels.empty()) bad("concurrency levels must not be empty");
  for (auto c : concurrency_levels) {
    if (c < 1) bad("concurrency levels must be >= 1");
  }
  if (duration_s < 1) bad("duration_s must be >= 1");
  if (warmup_s < 0) bad("warmup_s must be >= 0");
  if (block_time_ms < 1) bad("block_time_ms must be >= 1");
  if (bus_latency.min_ms < 0 || bus_latency.max_ms < bus_latency.min_ms) {
    bad("bus latency needs 0 <= min <= max");
  }
  if (!(bus_latency.drop_probability >= 0.0 && bus_latency.drop_probability <= 1.0)) {
    bad("drop probability must be in [0, 1]");
  }
  if (upload.base_ms < 0 || upload.per_mib_ms < 0) bad("upload latency must be >= 0");
  if (!(msg_cap_per_s > 0.0) || !(tx_cap_per_s > 0.0)) bad("caps must be > 0");
  if (quote_ttl_ms < 1) bad("quote TTL must be >= 1 ms");
  if (session_timeout_ms < 1) bad("session timeout must be >= 1 ms");
  if (ua_balance < Amount{}) bad("user balance must be >= 0");
  for (auto kind : {TxKind::RegisterIdentity, TxKind::EscrowLock, TxKind::EscrowRelease,
                    TxKind::EscrowRefund, TxKind::AnchorOrder, TxKind::AnchorDelivery}) {
    if (!gas_schedule.gas.contains(kind)) bad("gas schedule lacks " + std::string(tx_kind_name(kind)));
  }
  light.validate();
  pipeline.validate();
  genai.validate();
}

const WorkloadSpec& RunConfig::workload_spec(WorkloadKind kind) const {
  switch (kind) {
    case WorkloadKind::Light: return light;
    case WorkloadKind::PipelineK: return pipeline;
    case WorkloadKind::GenAI: return genai;
  }
  return light;
}

WorkloadSpec& RunConfig::workload_spec(WorkloadKind kind) {
  return const_cast<WorkloadSpec&>(std::as_const(*this).workload_spec(kind));
}

std::uint64_t RunConfig::max_tx_per_block() const {
  const double per_block = tx_cap_per_s * static_cast<double>(block_time_ms) / 1000.0;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(per_block)));
}

LedgerConfig RunConfig::ledger_config() const {
  LedgerConfig c;
  c.block_time_ms = block_time_ms;
  c.gas_schedule = gas_schedule;
  c.chain_id = chain_id;
  c.escrow_ref = escrow_ref;
  c.max_tx_per_block = max_tx_per_block();
  return c;
}

Json RunConfig::to_json() const {
  Json gas = Json::object();
  for (const auto& [kind, g] : gas_schedule.gas) gas[std::string(tx_kind_name(kind))] = g;
  Json levels = Json::array();
  for (auto c : concurrency_levels) levels.push_back(c);
  return Json{
      {"ledger", {{"blockTimeMs", block_time_ms}, {"chainId", chain_id}, {"escrowRef", escrow_ref}}},
      {"bus",
       {{"latencyMinMs", bus_latency.min_ms},
        {"latencyMaxMs", bus_latency.max_ms},
        {"dropProbability", bus_latency.drop_probability}}},
      {"store", {{"uploadBaseMs", upload.base_ms}, {"uploadPerMibMs", upload.per_mib_ms}}},
      {"workloads",
       {{"light", workload_json(light)},
        {"pipeline", workload_json(pipeline)},
        {"genai", workload_json(genai)}}},
      {"caps", {{"msgPerS", msg_cap_per_s}, {"txPerS", tx_cap_per_s}}},
      {"gas_schedule", gas},
      {"session",
       {{"quoteTtlMs", quote_ttl_ms},
        {"timeoutMs", session_timeout_ms},
        {"uaBalance", ua_balance.to_string()},
        {"refundOnFailure", refund_on_failure},
        {"releaseAttribution", release_attribution_name(attribution)}}},
      {"bench",
       {{"seed", seed},
        {"mode", session_mode_name(mode)},
        {"workload", workload_kind_name(workload)},
        {"trials", trials},
        {"concurrency", concurrency},
        {"concurrencyLevels", levels},
        {"durationS", duration_s},
        {"warmupS", warmup_s}}},
  };
}

RunConfig RunConfig::from_json(const Json& j, RunConfig c) {
  each(j, "config", [&](const std::string& section, const Json& body) {
    if (section == "ledger") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "blockTimeMs") c.block_time_ms = as_int(v, k);
        else if (k == "chainId") c.chain_id = static_cast<std::uint64_t>(as_int(v, k));
        else if (k == "escrowRef") c.escrow_ref = as_string(v, k);
        else return false;
        return true;
      });
    } else if (section == "bus") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "latencyMinMs") c.bus_latency.min_ms = as_int(v, k);
        else if (k == "latencyMaxMs") c.bus_latency.max_ms = as_int(v, k);
        else if (k == "dropProbability") c.bus_latency.drop_probability = as_number(v, k);
        else return false;
        return true;
      });
    } else if (section == "store") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "uploadBaseMs") c.upload.base_ms = as_int(v, k);
        else if (k == "uploadPerMibMs") c.upload.per_mib_ms = as_int(v, k);
        else return false;
        return true;
      });
    } else if (section == "workloads") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "light") read_workload(v, "workloads.light", c.light);
        else if (k == "pipeline") read_workload(v, "workloads.pipeline", c.pipeline);
        else if (k == "genai") read_workload(v, "workloads.genai", c.genai);
        else return false;
        return true;
      });
    } else if (section == "caps") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "msgPerS") c.msg_cap_per_s = as_number(v, k);
        else if (k == "txPerS") c.tx_cap_per_s = as_number(v, k);
        else return false;
        return true;
      });
    } else if (section == "gas_schedule") {
      each(body, section, [&](const std::string& k, const Json& v) {
        TxKind kind;
        try {
          kind = parse_tx_kind(k);
        } catch (const Error&) {
          return false;
        }
        const std::int64_t g = as_int(v, k);
        if (g < 0) bad("gas for " + k + " must be >= 0");
        c.gas_schedule.gas[kind] = static_cast<std::uint64_t>(g);
        return true;
      });
    } else if (section == "session") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "quoteTtlMs") c.quote_ttl_ms = as_int(v, k);
        else if (k == "timeoutMs") c.session_timeout_ms = as_int(v, k);
        else if (k == "uaBalance") c.ua_balance = as_amount(v, k);
        else if (k == "refundOnFailure") c.refund_on_failure = as_bool(v, k);
        else if (k == "releaseAttribution") c.attribution = parse_release_attribution(as_string(v, k));
        else return false;
        return true;
      });
    } else if (section == "bench") {
      each(body, section, [&](const std::string& k, const Json& v) {
        if (k == "seed") c.seed = static_cast<std::uint64_t>(as_int(v, k));
        else if (k == "mode") c.mode = parse_session_mode(as_string(v, k));
        else if (k == "workload") c.workload = parse_workload_kind(as_string(v, k));
        else if (k == "trials") c.trials = as_int(v, k);
        else if (k == "concurrency") c.concurrency = as_int(v, k);
        else if (k == "durationS") c.duration_s = as_int(v, k);
        else if (k == "warmupS") c.warmup_s = as_int(v, k);
        else if (k == "concurrencyLevels") {
          if (!v.is_array()) bad("'concurrencyLevels' must be an array");
          c.concurrency_levels.clear();
          for (const auto& x : v) c.concurrency_levels.push_back(as_int(x, k));
        } else {
          return false;
        }
        return true;
      });
    } else {
      return false;
    }
    return true;
  });
  c.validate();
  return c;
}

RunConfig RunConfig::from_json(const Json& j) { return from_json(j, RunConfig{}); }

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = parse_json(ss.str());
  } catch (const Error& e) {
    bad(path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv("AGENTOSI_CONFIG"); env && *env) return load_config(env);
  RunConfig c;
  c.validate();
  return c;
}

}  // namespace agentosi
