#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "agentosi/amount.hpp"
#include "agentosi/bytes.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/crypto.hpp"

namespace agentosi {

// Input constraint tree. Supported keywords:
//   type: "object" | "string" | "integer" | "boolean" | "array"
//   properties: {name: schema}, required: [name...]   (object)
//   enum: [values...]                                  (any type)
//   minimum, maximum: integer bounds, inclusive        (integer)
//   maxLength: UTF-8 byte-length bound                 (string)
//   items: schema                                      (array)
class InputSchema {
 public:
  InputSchema() = default;
  // Throws Errc::InvalidSchema on unknown keywords or ill-typed values.
  static InputSchema parse(const Json& spec);

  struct Violation {
    std::string path;  // JSON pointer, "" for the root
    std::string rule;  // "required", "type", "enum", "minimum", "maximum", "maxLength"
    friend bool operator==(const Violation&, const Violation&) = default;
  };

  std::vector<Violation> validate(const Json& value) const;
  // A value the schema accepts, if one exists.
  std::optional<Json> witness() const;
  bool non_vacuous() const;

  const Json& spec() const { return spec_; }

 private:
  Json spec_ = Json::object();
};

enum class OutputType { InlineJson, ContentRef };
enum class PricingUnit { PerRequest, PerStep, PerToken, PerResource };

std::string_view output_type_name(OutputType t);
std::string_view pricing_unit_name(PricingUnit u);

struct Pricing {
  PricingUnit unit = PricingUnit::PerRequest;
  Amount price_per_unit;
  std::string currency = "USDC";
  std::string step_param = "steps";  // params field holding the step count
};

struct CapabilityManifest {
  std::string service_id;
  Address payee;
  std::vector<std::string> tags;
  InputSchema input_schema;
  OutputType output_type = OutputType::InlineJson;
  Pricing pricing;
  Signature signature;

  Json unsigned_json() const;
  Json to_json() const;
  static CapabilityManifest from_json(const Json& j);

  // Fills payee and signature from the identity.
  void sign_with(const AgentIdentity& payee_identity);
  bool signature_valid() const;
  // Signature, positive price and a non-vacuous schema.
  bool well_formed() const;
};

struct ServiceRequest {
  std::string service_id;
  Json params = Json::object();
  Address requester;
  Nonce32 client_nonce;

  Json to_json() const;
  static ServiceRequest from_json(const Json& j);
};

struct ValidationVerdict {
  bool accepted = false;
  std::vector<InputSchema::Violation> violations;
  explicit operator bool() const { return accepted; }
};

ValidationVerdict validate_request(const CapabilityManifest& manifest, const ServiceRequest& request);

// Throws Errc::SchemaViolation if the request does not validate, or
// Errc::NoPricing for metering units this build does not price.
Amount price_request(const CapabilityManifest& manifest, const ServiceRequest& request);

// Throws Errc::SchemaViolation if the request does not validate.
Digest32 compute_request_hash(const CapabilityManifest& manifest, const ServiceRequest& request);
// Hash of the canonical request without schema validation.
Digest32 request_digest(const ServiceRequest& request);

struct DiscoveryQuery {
  std::optional<std::string> service_id;
  std::vector<std::string> tags;  // all must be present
};

// In-simulation directory of signed manifests.
class CapabilityRegistry {
 public:
  void advertise(CapabilityManifest manifest);
  // Manifests whose signature verifies and that match the query.
  std::vector<CapabilityManifest> discover(const DiscoveryQuery& query) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<CapabilityManifest> manifests_;
};

}  // namespace agentosi
