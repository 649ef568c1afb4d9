#include <gtest/gtest.h>

#include "agentosi/error.hpp"
#include "agentosi/provenance.hpp"
#include "agentosi/settlement.hpp"
#include "agentosi/workload.hpp"

using namespace agentosi;

namespace {

struct ProvenanceFixture : ::testing::Test {
  AgentIdentity sa = AgentIdentity::from_seed(501);
  AgentIdentity ua = AgentIdentity::from_seed(502);
  Ledger ledger{LedgerConfig{}};
  Rng rng{11};
  WorkloadSpec spec = default_workload(WorkloadKind::PipelineK);
  CapabilityManifest manifest = workload_manifest(spec, sa);
  ContentStore store;
  ServiceRequest request;
  Digest32 rh;
  Quote quote;
  Receipt receipt;
  WorkloadOutput out;
  ProvenanceArtifact artifact;
  std::int64_t now = 0;

  void SetUp() override {
    ledger.add_genesis_balance(ua.address(), Amount::from_units(1));
    now = ledger.register_identity(sa, now).block_timestamp_ms;
    now = ledger.register_identity(ua, now).block_timestamp_ms;
    request.service_id = manifest.service_id;
    request.params = workload_request_params(spec, 1);
    request.requester = ua.address();
    rh = compute_request_hash(manifest, request);
    quote = issue_quote(sa, rh, manifest, request, now, 120'000, rng, 31337, "e").quote;
    receipt = pay_quote(ua, ledger, quote, now);
    now = ledger.last_block_ms();
    out = execute_workload(spec, request, rh, quote_id(quote), store, now);
    artifact = build_provenance(sa, out.log, receipt, out.output_cid);
  }
};

}  // namespace

TEST_F(ProvenanceFixture, PipelineOutput) {
  EXPECT_EQ(out.log.entries.size(), 5u);
  EXPECT_TRUE(out.log.well_formed());
  EXPECT_EQ(out.stored.size(), 5u);
  EXPECT_EQ(out.end_ms - now, 5 * 150 + 5 * 51);
  EXPECT_EQ(Cid::of(out.content), out.output_cid);
}

TEST_F(ProvenanceFixture, HonestArtifactVerifies) {
  const auto v = verify_provenance(artifact, quote, receipt, out.content);
  EXPECT_TRUE(v.verdict.accepted);
  EXPECT_EQ(v.assurance, AssuranceLevel::SignedLog);
  EXPECT_TRUE(verify_exec_log(artifact, out.log).accepted);
  EXPECT_EQ(ProvenanceArtifact::from_json(artifact.to_json()), artifact);
  EXPECT_EQ(ExecutionLog::from_json(out.log.to_json()), out.log);
}

TEST_F(ProvenanceFixture, Rejections) {
  auto reason = [&](const ProvenanceArtifact& a, ByteView content) {
    return verify_provenance(a, quote, receipt, content).verdict.reason;
  };
  auto content = out.content;
  content[0] ^= 1;
  EXPECT_EQ(reason(artifact, content), RejectReason::CidMismatch);
  auto a = artifact;
  a.exec_log_hash = sha256(std::string_view("x"));
  EXPECT_EQ(reason(a, out.content), RejectReason::SignerMismatch);
  a = artifact;
  a.sa = ua.address();
  EXPECT_EQ(reason(a, out.content), RejectReason::SignerMismatch);

  const auto impostor = AgentIdentity::from_seed(599);
  a = artifact;
  a.signature = impostor.sign(canonicalize(a.unsigned_json()));
  EXPECT_EQ(reason(a, out.content), RejectReason::SignerMismatch);

  auto other_receipt = receipt;
  other_receipt.tx_hash = sha256(std::string_view("t"));
  EXPECT_EQ(verify_provenance(artifact, quote, other_receipt, out.content).verdict.reason,
            RejectReason::BindingMismatch);
}

TEST_F(ProvenanceFixture, ExecLogMismatch) {
  auto log = out.log;
  log.entries[0].tool_name = "other";
  EXPECT_FALSE(verify_exec_log(artifact, log).accepted);
}

TEST_F(ProvenanceFixture, BuildRejectsForeignLog) {
  auto log = out.log;
  log.quote_id = sha256(std::string_view("other"));
  EXPECT_THROW(build_provenance(sa, log, receipt, out.output_cid), Error);
  ExecutionLog empty;
  empty.request_hash = rh;
  empty.quote_id = quote_id(quote);
  EXPECT_THROW(build_provenance(sa, empty, receipt, out.output_cid), Error);
}

TEST_F(ProvenanceFixture, HashCoversSignature) {
  const auto h = provenance_hash(artifact);
  EXPECT_EQ(h, sha256(canonicalize(artifact.to_json())));
  auto a = artifact;
  a.signature.bytes[10] ^= 1;
  EXPECT_NE(provenance_hash(a), h);
}

TEST(Workload, LightAndGenAi) {
  ContentStore store;
  const auto ua = AgentIdentity::from_seed(1);
  ServiceRequest req{"svc.light.echo", Json{{"prompt", "x"}}, ua.address(), {}};
  const auto rh = request_digest(req);
  const auto light = execute_workload(default_workload(WorkloadKind::Light), req, rh, Digest32{}, store, 0);
  ASSERT_TRUE(light.inline_result.has_value());
  EXPECT_EQ(light.end_ms, 2);
  EXPECT_EQ(light.log.entries.size(), 1u);
  EXPECT_EQ(light.output_cid, Cid::of(canonical_bytes(*light.inline_result)));
  EXPECT_EQ(store.size(), 0u);

  ServiceRequest g{"svc.genai.image", Json{{"prompt", "p"}, {"width", 512}, {"height", 512}}, ua.address(), {}};
  const auto gen = execute_workload(default_workload(WorkloadKind::GenAI), g, request_digest(g), Digest32{},
                                    store, 1'000);
  EXPECT_EQ(gen.end_ms, 1'000 + 4'122 + 55);
  EXPECT_EQ(gen.content.size(), 262'144u);
  EXPECT_EQ(store.get(gen.output_cid, gen.end_ms), gen.content);
}
