#include "agentosi/workload.hpp"

#include "agentosi/rng.hpp"

namespace agentosi {

namespace {

constexpr std::pair<WorkloadKind, std::string_view> kKindNames[] = {
    {WorkloadKind::Light, "light"},
    {WorkloadKind::PipelineK, "pipeline"},
    {WorkloadKind::GenAI, "genai"},
};

std::uint64_t seed_from(const Digest32& d) {
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | d.raw()[static_cast<std::size_t>(i)];
  return s;
}

Bytes synth_bytes(const Digest32& seed, std::int64_t size) {
  Bytes out(static_cast<std::size_t>(size));
  Rng rng(seed_from(seed));
  rng.fill(out.data(), out.size());
  return out;
}

}  // namespace

std::string_view workload_kind_name(WorkloadKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "light";
}

WorkloadKind parse_workload_kind(std::string_view name) {
  for (const auto& [kind, n] : kKindNames) {
    if (n == name) return kind;
  }
  throw Error(Errc::Config, "unknown workload '" + std::string(name) + "'");
}

void WorkloadSpec::validate() const {
  if (overhead_ms < 0) throw Error(Errc::Config, "workload overhead_ms must be >= 0");
  if (k < 1) throw Error(Errc::Config, "pipeline K must be >= 1");
  if (step_ms < 0) throw Error(Errc::Config, "pipeline step_ms must be >= 0");
  if (artifact_bytes < 1) throw Error(Errc::Config, "pipeline artifact_bytes must be >= 1");
  if (exec_ms < 0) throw Error(Errc::Config, "genai exec_ms must be >= 0");
  if (output_bytes < 1) throw Error(Errc::Config, "genai output_bytes must be >= 1");
  if (!price.is_positive()) throw Error(Errc::Config, "workload price must be positive");
}

Json WorkloadSpec::to_json() const {
  Json j{{"kind", workload_kind_name(kind)}, {"price", price.micros()}};
  switch (kind) {
    case WorkloadKind::Light: j["overheadMs"] = overhead_ms; break;
    case WorkloadKind::PipelineK:
      j["k"] = k;
      j["stepMs"] = step_ms;
      j["artifactBytes"] = artifact_bytes;
      break;
    case WorkloadKind::GenAI:
      j["execMs"] = exec_ms;
      j["outputBytes"] = output_bytes;
      break;
  }
  return j;
}

WorkloadSpec default_workload(WorkloadKind kind) {
  WorkloadSpec s;
  s.kind = kind;
  if (kind == WorkloadKind::GenAI) s.price = Amount::from_micros(250'000);
  return s;
}

std::string workload_service_id(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Light: return "svc.light.echo";
    case WorkloadKind::PipelineK: return "svc.pipeline.kstep";
    case WorkloadKind::GenAI: return "svc.genai.image";
  }
  return "svc.light.echo";
}

CapabilityManifest workload_manifest(const WorkloadSpec& spec, const AgentIdentity& sa) {
  CapabilityManifest m;
  m.service_id = workload_service_id(spec.kind);
  m.pricing.price_per_unit = spec.price;
  switch (spec.kind) {
    case WorkloadKind::Light:
      m.tags = {"json", "light"};
      m.input_schema = InputSchema::parse(Json::parse(R"({
        "type": "object",
        "properties": {"prompt": {"type": "string", "maxLength": 256}},
        "required": ["prompt"]})"));
      m.output_type = OutputType::InlineJson;
      m.pricing.unit = PricingUnit::PerRequest;
      break;
    case WorkloadKind::PipelineK:
      m.tags = {"ipfs", "pipeline"};
      m.input_schema = InputSchema::parse(Json::parse(R"({
        "type": "object",
        "properties": {
          "steps": {"type": "integer", "minimum": 1, "maximum": 64},
          "input": {"type": "string", "maxLength": 1024}},
        "required": ["steps", "input"]})"));
      m.output_type = OutputType::ContentRef;
      m.pricing.unit = PricingUnit::PerStep;
      m.pricing.step_param = "steps";
      break;
    case WorkloadKind::GenAI:
      m.tags = {"genai", "image", "ipfs"};
      m.input_schema = InputSchema::parse(Json::parse(R"({
        "type": "object",
        "properties": {
          "prompt": {"type": "string", "maxLength": 1024},
          "width": {"type": "integer", "enum": [512, 768, 1024]},
          "height": {"type": "integer", "enum": [512, 768, 1024]}},
        "required": ["prompt", "width", "height"]})"));
      m.output_type = OutputType::ContentRef;
      m.pricing.unit = PricingUnit::PerRequest;
      break;
  }
  m.sign_with(sa);
  return m;
}

Json workload_request_params(const WorkloadSpec& spec, std::uint64_t n) {
  const std::string tag = std::to_string(n);
  switch (spec.kind) {
    case WorkloadKind::Light: return Json{{"prompt", "ping-" + tag}};
    case WorkloadKind::PipelineK: return Json{{"steps", spec.k}, {"input", "dataset-" + tag}};
    case WorkloadKind::GenAI:
      return Json{{"prompt", "a lighthouse at dusk #" + tag}, {"width", 1024}, {"height", 1024}};
  }
  return Json::object();
}

WorkloadOutput execute_workload(const WorkloadSpec& spec, const ServiceRequest& request,
                                const Digest32& request_hash, const Digest32& quote_id,
                                ContentStore& store, std::int64_t now_ms) {
  WorkloadOutput out;
  out.log.request_hash = request_hash;
  out.log.quote_id = quote_id;
  std::int64_t t = now_ms;
  const Digest32 params_hash = sha256(canonicalize(request.params));

  switch (spec.kind) {
    case WorkloadKind::Light: {
      t += spec.overhead_ms;
      Json result{{"service", request.service_id},
                  {"echo", request.params},
                  {"requestHash", request_hash.hex()},
                  {"status", "ok"}};
      out.content = canonical_bytes(result);
      out.log.append("light.respond", params_hash, sha256(out.content), t);
      out.inline_result = std::move(result);
      out.output_cid = Cid::of(out.content);
      break;
    }
    case WorkloadKind::PipelineK: {
      std::int64_t steps = spec.k;
      if (auto it = request.params.find("steps"); it != request.params.end() && it->is_number_integer()) {
        steps = it->get<std::int64_t>();
      }
      Digest32 prev = params_hash;
      for (std::int64_t i = 0; i < steps; ++i) {
        t += spec.step_ms;
        const Digest32 input =
            sha256(canonicalize(Json{{"step", i}, {"previous", prev.hex()}, {"params", params_hash.hex()}}));
        Bytes artifact = synth_bytes(sha256(canonicalize(Json{{"seed", input.hex()}, {"quote", quote_id.hex()}})),
                                     spec.artifact_bytes);
        PutResult put = store.put(artifact, t);
        t = put.completion_ms;
        out.log.append("pipeline.step", input, put.cid.digest(), t);
        out.stored.push_back(put.cid);
        prev = put.cid.digest();
        out.output_cid = put.cid;
        out.content = std::move(artifact);
      }
      break;
    }
    case WorkloadKind::GenAI: {
      t += spec.exec_ms;
      Bytes image = synth_bytes(sha256(canonicalize(Json{{"seed", params_hash.hex()}, {"quote", quote_id.hex()}})),
                                spec.output_bytes);
      PutResult put = store.put(image, t);
      t = put.completion_ms;
      out.log.append("genai.generate", params_hash, put.cid.digest(), t);
      out.stored.push_back(put.cid);
      out.output_cid = put.cid;
      out.content = std::move(image);
      break;
    }
  }
  out.end_ms = t;
  return out;
}

}  // namespace agentosi
