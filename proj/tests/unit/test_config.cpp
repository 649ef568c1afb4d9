#include <gtest/gtest.h>

#include <cstdlib>

#include "agentosi/bench.hpp"
#include "agentosi/config.hpp"
#include "agentosi/error.hpp"
#include "test_support.hpp"

using namespace agentosi;

TEST(Config, Defaults) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.max_tx_per_block(), 80u);
  EXPECT_EQ(c.block_time_ms, 2'000);
  EXPECT_EQ(c.workload_spec(WorkloadKind::GenAI).exec_ms, 4'122);
  EXPECT_EQ(c.ledger_config().max_tx_per_block, 80u);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.seed = 7;
  c.block_time_ms = 1'000;
  c.gas_schedule = c.gas_schedule.scaled(0.5);
  c.attribution = ReleaseAttribution::Serial;
  const auto back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(canonicalize(back.to_json()), canonicalize(c.to_json()));
}

TEST(Config, PartialOverlay) {
  const auto c = RunConfig::from_json(Json{{"ledger", {{"blockTimeMs", 500}}}});
  EXPECT_EQ(c.block_time_ms, 500);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(RunConfig::from_json(Json{{"nonsense", 1}}), Error);
  EXPECT_THROW(RunConfig::from_json(Json{{"ledger", {{"blockTimeMs", 0}}}}), Error);
  EXPECT_THROW(RunConfig::from_json(Json{{"caps", {{"bogus", 1}}}}), Error);
  EXPECT_THROW(parse_session_mode("web2"), Error);
  EXPECT_THROW(parse_workload_kind("heavy"), Error);
}

TEST(Config, LoadsFileAndEnvironment) {
  const auto dir = agentosi::testing::scratch_dir("config");
  write_file(dir / "c.json", R"({"bench":{"seed":9},"ledger":{"blockTimeMs":1000}})");
  EXPECT_EQ(load_config(dir / "c.json").seed, 9u);
  setenv("AGENTOSI_CONFIG", (dir / "c.json").c_str(), 1);
  EXPECT_EQ(resolve_config(std::nullopt).block_time_ms, 1'000);
  unsetenv("AGENTOSI_CONFIG");
  EXPECT_EQ(resolve_config(std::nullopt).block_time_ms, 2'000);
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
  write_file(dir / "bad.json", "{");
  EXPECT_THROW(load_config(dir / "bad.json"), Error);
}

TEST(Config, NamesRoundTrip) {
  for (auto m : {SessionMode::AgentOsi, SessionMode::Web3Baseline}) {
    EXPECT_EQ(parse_session_mode(session_mode_name(m)), m);
  }
  for (auto a : {ReleaseAttribution::Overlapped, ReleaseAttribution::Serial}) {
    EXPECT_EQ(parse_release_attribution(release_attribution_name(a)), a);
  }
  for (auto k : {WorkloadKind::Light, WorkloadKind::PipelineK, WorkloadKind::GenAI}) {
    EXPECT_EQ(parse_workload_kind(workload_kind_name(k)), k);
  }
}
