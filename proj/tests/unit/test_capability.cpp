#include <gtest/gtest.h>

#include "agentosi/capability.hpp"
#include "agentosi/error.hpp"
#include "agentosi/workload.hpp"

using namespace agentosi;

namespace {

ServiceRequest request_for(const WorkloadSpec& spec, const Address& requester, std::uint64_t n = 1) {
  ServiceRequest r;
  r.service_id = workload_service_id(spec.kind);
  r.params = workload_request_params(spec, n);
  r.requester = requester;
  r.client_nonce = Nonce32(sha256(std::to_string(n)).raw());
  return r;
}

}  // namespace

TEST(InputSchema, ValidatesConstraints) {
  const auto s = InputSchema::parse(Json::parse(R"({
    "type": "object",
    "properties": {"n": {"type": "integer", "minimum": 1, "maximum": 3},
                   "s": {"type": "string", "maxLength": 2},
                   "e": {"enum": ["a", "b"]},
                   "xs": {"type": "array", "items": {"type": "boolean"}}},
    "required": ["n"]})"));
  EXPECT_TRUE(s.validate(Json{{"n", 2}}).empty());
  EXPECT_EQ(s.validate(Json::object()).at(0).rule, "required");
  EXPECT_EQ(s.validate(Json{{"n", 0}}).at(0).rule, "minimum");
  EXPECT_EQ(s.validate(Json{{"n", 4}}).at(0).rule, "maximum");
  EXPECT_EQ(s.validate(Json{{"n", "2"}}).at(0).rule, "type");
  EXPECT_EQ(s.validate(Json{{"n", 1}, {"s", "abc"}}).at(0).rule, "maxLength");
  EXPECT_EQ(s.validate(Json{{"n", 1}, {"e", "c"}}).at(0).rule, "enum");
  const auto v = s.validate(Json{{"n", 1}, {"xs", Json::array({true, 3})}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "/xs/1");
}

TEST(InputSchema, RejectsUnknownKeyword) {
  EXPECT_THROW(InputSchema::parse(Json{{"type", "object"}, {"pattern", "x"}}), Error);
  EXPECT_THROW(InputSchema::parse(Json{{"type", "float"}}), Error);
}

TEST(InputSchema, VacuousSchemaDetected) {
  const auto s = InputSchema::parse(Json::parse(R"({"type":"integer","minimum":5,"maximum":1})"));
  EXPECT_FALSE(s.non_vacuous());
  EXPECT_FALSE(s.witness().has_value());
  const auto ok = InputSchema::parse(Json::parse(R"({"type":"integer","minimum":5,"maximum":9})"));
  ASSERT_TRUE(ok.witness().has_value());
  EXPECT_TRUE(ok.validate(*ok.witness()).empty());
}

TEST(Manifest, SignedAndWellFormed) {
  const auto sa = AgentIdentity::from_seed(301);
  for (auto kind : {WorkloadKind::Light, WorkloadKind::PipelineK, WorkloadKind::GenAI}) {
    const auto m = workload_manifest(default_workload(kind), sa);
    EXPECT_TRUE(m.well_formed());
    EXPECT_EQ(m.payee, sa.address());
    auto back = CapabilityManifest::from_json(m.to_json());
    EXPECT_TRUE(back.signature_valid());
    back.pricing.price_per_unit = Amount::from_micros(1);
    EXPECT_FALSE(back.signature_valid());
  }
}

TEST(Pricing, PerRequestAndPerStep) {
  const auto sa = AgentIdentity::from_seed(302);
  const auto ua = AgentIdentity::from_seed(303);
  const auto light = default_workload(WorkloadKind::Light);
  EXPECT_EQ(price_request(workload_manifest(light, sa), request_for(light, ua.address())),
            Amount::from_micros(10'000));
  const auto pipe = default_workload(WorkloadKind::PipelineK);
  EXPECT_EQ(price_request(workload_manifest(pipe, sa), request_for(pipe, ua.address())),
            Amount::from_micros(50'000));
  const auto gen = default_workload(WorkloadKind::GenAI);
  EXPECT_EQ(price_request(workload_manifest(gen, sa), request_for(gen, ua.address())),
            Amount::from_micros(250'000));
}

TEST(Pricing, UnsupportedUnit) {
  const auto sa = AgentIdentity::from_seed(302);
  auto m = workload_manifest(default_workload(WorkloadKind::Light), sa);
  m.pricing.unit = PricingUnit::PerToken;
  m.sign_with(sa);
  try {
    price_request(m, request_for(default_workload(WorkloadKind::Light), sa.address()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoPricing);
  }
}

TEST(RequestHash, StableAndSensitive) {
  const auto sa = AgentIdentity::from_seed(304);
  const auto ua = AgentIdentity::from_seed(305);
  const auto spec = default_workload(WorkloadKind::Light);
  const auto m = workload_manifest(spec, sa);
  auto r = request_for(spec, ua.address());
  const auto h = compute_request_hash(m, r);
  EXPECT_EQ(h, request_digest(r));
  EXPECT_EQ(h, request_digest(ServiceRequest::from_json(r.to_json())));
  r.params["prompt"] = "other";
  EXPECT_NE(compute_request_hash(m, r), h);
  r.params = Json{{"prompt", 5}};
  EXPECT_FALSE(validate_request(m, r));
  EXPECT_THROW(compute_request_hash(m, r), Error);
}

TEST(Registry, DiscoversByIdAndTags) {
  const auto sa = AgentIdentity::from_seed(306);
  CapabilityRegistry reg;
  reg.advertise(workload_manifest(default_workload(WorkloadKind::Light), sa));
  reg.advertise(workload_manifest(default_workload(WorkloadKind::GenAI), sa));
  EXPECT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg.discover({}).size(), 2u);
  EXPECT_EQ(reg.discover({std::string("svc.genai.image"), {}}).size(), 1u);
  EXPECT_EQ(reg.discover({std::nullopt, {"ipfs"}}).size(), 1u);
  EXPECT_EQ(reg.discover({std::nullopt, {"ipfs", "json"}}).size(), 0u);
}
