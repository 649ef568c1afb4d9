#include "agentosi/capability.hpp"

#include <algorithm>
#include <mutex>
#include <set>

namespace agentosi {

namespace {

const std::set<std::string> kKeywords = {"type",    "properties", "required", "enum",
                                         "minimum", "maximum",    "maxLength", "items",
                                         "description"};
const std::set<std::string> kTypes = {"object", "string", "integer", "boolean", "array"};

std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

void check_schema(const Json& s, const std::string& where) {
  if (!s.is_object()) throw Error(Errc::InvalidSchema, where + ": schema must be an object");
  for (const auto& [key, val] : s.items()) {
    if (!kKeywords.contains(key)) {
      throw Error(Errc::InvalidSchema, where + ": unsupported keyword '" + key + "'");
    }
  }
  if (s.contains("type")) {
    if (!s["type"].is_string() || !kTypes.contains(s["type"].get<std::string>())) {
      throw Error(Errc::InvalidSchema, where + ": bad type");
    }
  }
  if (s.contains("properties")) {
    if (!s["properties"].is_object()) throw Error(Errc::InvalidSchema, where + ": properties");
    for (const auto& [name, child] : s["properties"].items()) {
      check_schema(child, where + "/" + pointer_escape(name));
    }
  }
  if (s.contains("required")) {
    const Json& r = s["required"];
    if (!r.is_array() || !std::all_of(r.begin(), r.end(), [](const Json& x) { return x.is_string(); })) {
      throw Error(Errc::InvalidSchema, where + ": required must be a string array");
    }
  }
  if (s.contains("enum") && !s["enum"].is_array()) {
    throw Error(Errc::InvalidSchema, where + ": enum must be an array");
  }
  for (const char* k : {"minimum", "maximum", "maxLength"}) {
    if (s.contains(k) && !s[k].is_number_integer()) {
      throw Error(Errc::InvalidSchema, where + ": " + k + " must be an integer");
    }
  }
  if (s.contains("maxLength") && s["maxLength"].get<std::int64_t>() < 0) {
    throw Error(Errc::InvalidSchema, where + ": maxLength must be >= 0");
  }
  if (s.contains("items")) check_schema(s["items"], where + "/items");
}

bool type_matches(const std::string& type, const Json& v) {
  if (type == "object") return v.is_object();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "boolean") return v.is_boolean();
  if (type == "array") return v.is_array();
  return false;
}

void validate_node(const Json& s, const Json& v, const std::string& path,
                   std::vector<InputSchema::Violation>& out) {
  if (s.contains("type") && !type_matches(s["type"].get<std::string>(), v)) {
    out.push_back({path, "type"});
    return;
  }
  if (s.contains("enum")) {
    const Json& e = s["enum"];
    if (std::find(e.begin(), e.end(), v) == e.end()) out.push_back({path, "enum"});
  }
  if (v.is_number_integer()) {
    const auto x = v.get<std::int64_t>();
    if (s.contains("minimum") && x < s["minimum"].get<std::int64_t>()) out.push_back({path, "minimum"});
    if (s.contains("maximum") && x > s["maximum"].get<std::int64_t>()) out.push_back({path, "maximum"});
  }
  if (v.is_string() && s.contains("maxLength") &&
      static_cast<std::int64_t>(v.get_ref<const std::string&>().size()) >
          s["maxLength"].get<std::int64_t>()) {
    out.push_back({path, "maxLength"});
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& name : s["required"]) {
        if (!v.contains(name.get<std::string>())) {
          out.push_back({path + "/" + pointer_escape(name.get<std::string>()), "required"});
        }
      }
    }
    if (s.contains("properties")) {
      for (const auto& [name, child] : s["properties"].items()) {
        auto it = v.find(name);
        if (it != v.end()) validate_node(child, *it, path + "/" + pointer_escape(name), out);
      }
    }
  }
  if (v.is_array() && s.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      validate_node(s["items"], v[i], path + "/" + std::to_string(i), out);
    }
  }
}

std::optional<Json> witness_node(const Json& s) {
  auto accepts = [&](const Json& v) {
    std::vector<InputSchema::Violation> tmp;
    validate_node(s, v, "", tmp);
    return tmp.empty();
  };
  if (s.contains("enum")) {
    for (const auto& candidate : s["enum"]) {
      if (accepts(candidate)) return candidate;
    }
    return std::nullopt;
  }
  const std::string type = s.value("type", "");
  Json v;
  if (type == "integer") {
    std::int64_t x = 0;
    if (s.contains("minimum")) x = s["minimum"].get<std::int64_t>();
    else if (s.contains("maximum")) x = std::min<std::int64_t>(0, s["maximum"].get<std::int64_t>());
    v = x;
  } else if (type == "string") {
    v = "";
  } else if (type == "boolean") {
    v = false;
  } else if (type == "array") {
    v = Json::array();
  } else if (type == "object") {
    v = Json::object();
    if (s.contains("required")) {
      for (const auto& name : s["required"]) {
        const std::string n = name.get<std::string>();
        if (s.contains("properties") && s["properties"].contains(n)) {
          auto child = witness_node(s["properties"][n]);
          if (!child) return std::nullopt;
          v[n] = *child;
        } else {
          v[n] = nullptr;
        }
      }
    }
  }
  if (accepts(v)) return v;
  return std::nullopt;
}

}  // namespace

InputSchema InputSchema::parse(const Json& spec) {
  check_schema(spec, "");
  InputSchema out;
  out.spec_ = spec;
  return out;
}

std::vector<InputSchema::Violation> InputSchema::validate(const Json& value) const {
  std::vector<Violation> out;
  validate_node(spec_, value, "", out);
  return out;
}

std::optional<Json> InputSchema::witness() const { return witness_node(spec_); }

bool InputSchema::non_vacuous() const { return witness().has_value(); }

std::string_view output_type_name(OutputType t) {
  return t == OutputType::InlineJson ? "InlineJson" : "ContentRef";
}

std::string_view pricing_unit_name(PricingUnit u) {
  switch (u) {
    case PricingUnit::PerRequest: return "PerRequest";
    case PricingUnit::PerStep: return "PerStep";
    case PricingUnit::PerToken: return "PerToken";
    case PricingUnit::PerResource: return "PerResource";
  }
  return "PerRequest";
}

namespace {

OutputType parse_output_type(const std::string& s) {
  if (s == "InlineJson") return OutputType::InlineJson;
  if (s == "ContentRef") return OutputType::ContentRef;
  throw Error(Errc::MalformedObject, "unknown output type '" + s + "'");
}

PricingUnit parse_pricing_unit(const std::string& s) {
  for (auto u : {PricingUnit::PerRequest, PricingUnit::PerStep, PricingUnit::PerToken,
                 PricingUnit::PerResource}) {
    if (pricing_unit_name(u) == s) return u;
  }
  throw Error(Errc::MalformedObject, "unknown pricing unit '" + s + "'");
}

}  // namespace

Json CapabilityManifest::unsigned_json() const {
  return Json{{"serviceId", service_id},
              {"payee", payee.hex()},
              {"tags", tags},
              {"inputSchema", input_schema.spec()},
              {"outputType", output_type_name(output_type)},
              {"pricing",
               {{"unit", pricing_unit_name(pricing.unit)},
                {"pricePerUnit", pricing.price_per_unit.micros()},
                {"currency", pricing.currency},
                {"stepParam", pricing.step_param}}}};
}

Json CapabilityManifest::to_json() const {
  Json j = unsigned_json();
  j["signature"] = signature.to_json();
  return j;
}

CapabilityManifest CapabilityManifest::from_json(const Json& j) {
  CapabilityManifest m;
  m.service_id = require_string(j, "serviceId");
  m.payee = require_fixed<Address>(j, "payee");
  const Json& tags = require(j, "tags");
  if (!tags.is_array()) throw Error(Errc::MalformedObject, "tags must be an array");
  for (const auto& t : tags) {
    if (!t.is_string()) throw Error(Errc::MalformedObject, "tag must be a string");
    m.tags.push_back(t.get<std::string>());
  }
  m.input_schema = InputSchema::parse(require(j, "inputSchema"));
  m.output_type = parse_output_type(require_string(j, "outputType"));
  const Json& p = require(j, "pricing");
  m.pricing.unit = parse_pricing_unit(require_string(p, "unit"));
  m.pricing.price_per_unit = Amount::from_micros(require_int(p, "pricePerUnit"));
  m.pricing.currency = require_string(p, "currency");
  m.pricing.step_param = require_string(p, "stepParam");
  m.signature = Signature::from_json(require(j, "signature"));
  return m;
}

void CapabilityManifest::sign_with(const AgentIdentity& payee_identity) {
  payee = payee_identity.address();
  signature = payee_identity.sign(canonicalize(unsigned_json()));
}

bool CapabilityManifest::signature_valid() const {
  return signature.signer == payee && verify_signer(canonicalize(unsigned_json()), signature);
}

bool CapabilityManifest::well_formed() const {
  return signature_valid() && pricing.price_per_unit.is_positive() && input_schema.non_vacuous();
}

Json ServiceRequest::to_json() const {
  return Json{{"serviceId", service_id},
              {"params", params},
              {"requester", requester.hex()},
              {"clientNonce", client_nonce.hex()}};
}

ServiceRequest ServiceRequest::from_json(const Json& j) {
  ServiceRequest r;
  r.service_id = require_string(j, "serviceId");
  r.params = require(j, "params");
  r.requester = require_fixed<Address>(j, "requester");
  r.client_nonce = require_fixed<Nonce32>(j, "clientNonce");
  return r;
}

ValidationVerdict validate_request(const CapabilityManifest& manifest,
                                   const ServiceRequest& request) {
  ValidationVerdict v;
  if (request.service_id != manifest.service_id) {
    v.violations.push_back({"/serviceId", "enum"});
  }
  auto params = manifest.input_schema.validate(request.params);
  v.violations.insert(v.violations.end(), params.begin(), params.end());
  v.accepted = v.violations.empty();
  return v;
}

namespace {

[[noreturn]] void throw_schema(const ValidationVerdict& v) {
  std::string what = "request rejected:";
  for (const auto& x : v.violations) what += " " + x.path + "(" + x.rule + ")";
  throw Error(Errc::SchemaViolation, what);
}

}  // namespace

Amount price_request(const CapabilityManifest& manifest, const ServiceRequest& request) {
  auto verdict = validate_request(manifest, request);
  if (!verdict) throw_schema(verdict);
  switch (manifest.pricing.unit) {
    case PricingUnit::PerRequest:
      return manifest.pricing.price_per_unit;
    case PricingUnit::PerStep: {
      auto it = request.params.find(manifest.pricing.step_param);
      if (it == request.params.end() || !it->is_number_integer() || it->get<std::int64_t>() < 1) {
        throw Error(Errc::SchemaViolation,
                    "step count '" + manifest.pricing.step_param + "' must be an integer >= 1");
      }
      return manifest.pricing.price_per_unit * it->get<std::int64_t>();
    }
    case PricingUnit::PerToken:
    case PricingUnit::PerResource:
      break;
  }
  throw Error(Errc::NoPricing,
              std::string("metering unit ") + std::string(pricing_unit_name(manifest.pricing.unit)) +
                  " is not priced");
}

Digest32 request_digest(const ServiceRequest& request) {
  return sha256(canonicalize(request.to_json()));
}

Digest32 compute_request_hash(const CapabilityManifest& manifest, const ServiceRequest& request) {
  auto verdict = validate_request(manifest, request);
  if (!verdict) throw_schema(verdict);
  return request_digest(request);
}

void CapabilityRegistry::advertise(CapabilityManifest manifest) {
  std::unique_lock lock(mutex_);
  manifests_.push_back(std::move(manifest));
}

std::vector<CapabilityManifest> CapabilityRegistry::discover(const DiscoveryQuery& query) const {
  std::shared_lock lock(mutex_);
  std::vector<CapabilityManifest> out;
  for (const auto& m : manifests_) {
    if (query.service_id && m.service_id != *query.service_id) continue;
    bool tags_ok = std::all_of(query.tags.begin(), query.tags.end(), [&](const std::string& t) {
      return std::find(m.tags.begin(), m.tags.end(), t) != m.tags.end();
    });
    if (!tags_ok) continue;
    if (!m.signature_valid()) continue;
    out.push_back(m);
  }
  return out;
}

std::size_t CapabilityRegistry::size() const {
  std::shared_lock lock(mutex_);
  return manifests_.size();
}

}  // namespace agentosi
