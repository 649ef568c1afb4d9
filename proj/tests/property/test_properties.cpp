#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <set>
#include <unordered_set>

#include "agentosi/bench.hpp"
#include "agentosi/error.hpp"
#include "agentosi/metrics.hpp"
#include "agentosi/session.hpp"
#include "scenarios.hpp"

using namespace agentosi;

namespace {

std::string random_string(Rng& rng) {
  static const std::vector<std::string> pieces{"a", "Z", "0", " ", "\"", "\\", "\n", "\t", "\x01",
                                               "é", "ß", "中", "🐱", "/", "{", "]"};
  std::string s;
  const auto n = rng.uniform_int(0, 8);
  for (std::int64_t i = 0; i < n; ++i) s += pieces[rng.uniform_int(0, pieces.size() - 1)];
  return s;
}

Json random_json(Rng& rng, int depth) {
  const auto kind = rng.uniform_int(0, depth > 0 ? 6 : 4);
  switch (kind) {
    case 0: return Json(nullptr);
    case 1: return Json(rng.bernoulli(0.5));
    case 2: return Json(rng.uniform_int(-1'000'000'000'000, 1'000'000'000'000));
    case 3: return Json(static_cast<std::uint64_t>(rng.next()));
    case 4: return Json(random_string(rng));
    case 5: {
      Json a = Json::array();
      const auto n = rng.uniform_int(0, 4);
      for (std::int64_t i = 0; i < n; ++i) a.push_back(random_json(rng, depth - 1));
      return a;
    }
    default: {
      Json o = Json::object();
      const auto n = rng.uniform_int(0, 4);
      for (std::int64_t i = 0; i < n; ++i) o[random_string(rng)] = random_json(rng, depth - 1);
      return o;
    }
  }
}

Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes b(n);
  rng.fill(b.data(), n);
  return b;
}

int bit_distance(const Digest32& a, const Digest32& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(static_cast<unsigned>(a.raw()[i] ^ b.raw()[i]));
  return d;
}

double naive_percentile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  std::size_t rank = 1;
  while (static_cast<double>(rank) < p / 100.0 * static_cast<double>(xs.size())) ++rank;
  return xs[rank - 1];
}

}  // namespace

TEST(Property, CanonicalizationFixpoint) {
  Rng rng(1);
  for (int i = 0; i < 2'000; ++i) {
    const Json v = random_json(rng, 4);
    const std::string c = canonicalize(v);
    EXPECT_EQ(canonicalize(parse_json(c)), c);
  }
}

TEST(Property, SignatureSoundAndComplete) {
  Rng rng(2);
  const auto id = AgentIdentity::from_seed(1);
  const auto other = AgentIdentity::from_seed(2);
  for (int i = 0; i < 300; ++i) {
    const Bytes msg = random_bytes(rng, static_cast<std::size_t>(rng.uniform_int(1, 200)));
    const auto sig = id.sign(msg);
    ASSERT_TRUE(verify(id.public_key(), msg, sig));
    ASSERT_TRUE(verify_signer(msg, sig));
    Bytes m2 = msg;
    m2[rng.uniform_int(0, m2.size() - 1)] ^= static_cast<std::uint8_t>(1u << rng.uniform_int(0, 7));
    EXPECT_FALSE(verify_signer(m2, sig));
    auto s2 = sig;
    s2.bytes[rng.uniform_int(0, 63)] ^= static_cast<std::uint8_t>(1u << rng.uniform_int(0, 7));
    EXPECT_FALSE(verify_signer(msg, s2));
    auto s3 = sig;
    s3.signer = other.address();
    EXPECT_FALSE(verify_signer(msg, s3));
    EXPECT_FALSE(verify(other.public_key(), msg, sig));
  }
}

TEST(Property, HashAvalanche) {
  Rng rng(3);
  double total = 0;
  const int trials = 1'000;
  for (int i = 0; i < trials; ++i) {
    Bytes in = random_bytes(rng, static_cast<std::size_t>(rng.uniform_int(1, 128)));
    const auto h0 = sha256(in);
    in[rng.uniform_int(0, in.size() - 1)] ^= static_cast<std::uint8_t>(1u << rng.uniform_int(0, 7));
    total += bit_distance(h0, sha256(in)) / 256.0;
  }
  EXPECT_GE(total / trials, 0.25);
}

TEST(Property, MutatedQuotesNeverVerify) {
  Rng rng(4);
  const auto sa = AgentIdentity::from_seed(11);
  const auto ua = AgentIdentity::from_seed(12);
  const auto manifest = workload_manifest(default_workload(WorkloadKind::Light), sa);
  ServiceRequest req{manifest.service_id, Json{{"prompt", "x"}}, ua.address(), {}};
  const auto quote =
      issue_quote(sa, compute_request_hash(manifest, req), manifest, req, 0, 1'000, rng, 1, "e").quote;
  const std::string text = canonicalize(quote.to_json());
  int parsed = 0;
  for (int i = 0; i < 200; ++i) {
    std::string t = text;
    t[rng.uniform_int(0, t.size() - 1)] ^= static_cast<char>(1 << rng.uniform_int(0, 6));
    try {
      const auto q = Quote::from_json(parse_json(t));
      ++parsed;
      if (canonicalize(q.to_json()) != text) {
        EXPECT_FALSE(q.signature_valid()) << t;
      }
    } catch (const Error&) {
    } catch (const Json::exception&) {
    }
  }
  EXPECT_GT(parsed, 0);
}

TEST(Property, MutatedEnvelopesNeverVerify) {
  Rng rng(5);
  const auto a = AgentIdentity::from_seed(21);
  const auto b = AgentIdentity::from_seed(22);
  const auto env = MessageEnvelope::seal(a, b.address(), ThreadId{}, 1, 5, PayloadType::Text,
                                         Json{{"hello", "world"}, {"n", 5}});
  const std::string text = canonicalize(env.to_json());
  for (int i = 0; i < 100; ++i) {
    std::string t = text;
    t[rng.uniform_int(0, t.size() - 1)] ^= static_cast<char>(1 << rng.uniform_int(0, 6));
    try {
      const auto e = MessageEnvelope::from_json(parse_json(t));
      if (canonicalize(e.to_json()) != text) EXPECT_FALSE(e.signature_valid()) << t;
    } catch (const Error&) {
    } catch (const Json::exception&) {
    }
  }
}

TEST(Property, AddressesDistinct) {
  std::unordered_set<Address, FixedBytesHash> seen;
  for (std::uint64_t s = 0; s < 10'000; ++s) EXPECT_TRUE(seen.insert(AgentIdentity::from_seed(s).address()).second);
}

TEST(Property, ThreadIdsDistinct) {
  MessageBus bus(LatencyModel{}, 9);
  const auto a = AgentIdentity::from_seed(1).address();
  const auto b = AgentIdentity::from_seed(2).address();
  std::unordered_set<ThreadId, FixedBytesHash> seen;
  for (int i = 0; i < 100'000; ++i) ASSERT_TRUE(seen.insert(bus.open_thread(a, b)).second);
}

TEST(Property, QuoteIdsDistinct) {
  Rng rng(6);
  const auto sa = AgentIdentity::from_seed(31);
  const auto manifest = workload_manifest(default_workload(WorkloadKind::Light), sa);
  ServiceRequest req{manifest.service_id, Json{{"prompt", "same"}}, AgentIdentity::from_seed(32).address(), {}};
  const auto rh = compute_request_hash(manifest, req);
  std::unordered_set<Digest32, FixedBytesHash> seen;
  for (int i = 0; i < 100'000; ++i) {
    const auto q = issue_quote(sa, rh, manifest, req, i, 1'000, rng, 1, "e").quote;
    ASSERT_TRUE(seen.insert(quote_id(q)).second);
  }
}

TEST(Property, ConfirmationLatencyLaw) {
  Rng rng(7);
  Ledger ledger(LedgerConfig{});
  const auto sender = AgentIdentity::from_seed(41).address();
  const std::int64_t bt = ledger.block_time_ms();
  double sum = 0;
  std::int64_t max_wait = 0, min_wait = bt;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const std::int64_t t = static_cast<std::int64_t>(i) * bt + rng.uniform_int(0, bt - 1);
    ledger.submit(ledger.anchor_tx(TxKind::AnchorOrder, sender, Digest32{}), t);
    const auto r = ledger.produce_blocks_until(t + bt);
    ASSERT_EQ(r.size(), 1u);
    const auto w = r[0].confirmation_wait_ms();
    sum += static_cast<double>(w);
    max_wait = std::max(max_wait, w);
    min_wait = std::min(min_wait, w);
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, bt / 2.0, bt / 2.0 * 0.05);
  EXPECT_LE(max_wait, bt);
  EXPECT_GT(min_wait, 0);
}

TEST(Property, EventRoundTrip) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const auto d = [&] { return rng.fixed_bytes<Digest32>(); };
    const auto a = [&] { return rng.fixed_bytes<Address>(); };
    const auto amt = Amount::from_micros(rng.uniform_int(1, 1'000'000'000));
    const auto bn = static_cast<std::uint64_t>(rng.uniform_int(0, 1'000'000));
    const std::vector<LedgerEvent> events{
        IdentityRegisteredEvent{a(), AgentIdentity::from_seed(static_cast<std::uint64_t>(i)).public_key(), bn},
        EscrowLockedEvent{d(), d(), a(), a(), amt, rng.uniform_int(0, 1'000'000), bn},
        EscrowReleasedEvent{d(), d(), a(), amt, bn},
        EscrowRefundedEvent{d(), a(), amt, bn},
        AnchoredEvent{rng.bernoulli(0.5) ? TxKind::AnchorOrder : TxKind::AnchorDelivery, d(), a(), bn}};
    for (const auto& ev : events) EXPECT_EQ(decode_event(encode_event(ev)), ev);
  }
}

TEST(Property, PercentileMatchesNaiveOracle) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> xs(static_cast<std::size_t>(rng.uniform_int(1, 60)));
    for (auto& x : xs) x = static_cast<double>(rng.uniform_int(-1000, 1000));
    for (double p : {1.0, 10.0, 25.0, 50.0, 75.0, 90.0, 99.0, 100.0}) {
      EXPECT_EQ(percentile(xs, p), naive_percentile(xs, p));
    }
  }
}

TEST(Property, ProvenanceHashesDistinct) {
  Rng rng(10);
  const auto sa = AgentIdentity::from_seed(51);
  std::unordered_set<Digest32, FixedBytesHash> seen;
  for (int i = 0; i < 10'000; ++i) {
    ProvenanceArtifact a;
    a.request_hash = rng.fixed_bytes<Digest32>();
    a.quote_id = rng.fixed_bytes<Digest32>();
    a.receipt_tx_hash = rng.fixed_bytes<Digest32>();
    a.output_cid = Cid(rng.fixed_bytes<Digest32>());
    a.exec_log_hash = rng.fixed_bytes<Digest32>();
    a.sa = sa.address();
    a.signature = sa.sign(canonicalize(a.unsigned_json()));
    const auto h = provenance_hash(a);
    ASSERT_TRUE(seen.insert(h).second);
    ASSERT_EQ(provenance_hash(ProvenanceArtifact::from_json(parse_json(canonicalize(a.to_json())))), h);
  }
}

TEST(Property, StoreReturnsWhatItHashes) {
  Rng rng(11);
  ContentStore store;
  for (int i = 0; i < 500; ++i) {
    const Bytes b = random_bytes(rng, static_cast<std::size_t>(rng.uniform_int(1, 4096)));
    const auto put = store.put(b, i);
    EXPECT_EQ(sha256(store.get(put.cid, put.completion_ms)), put.cid.digest());
  }
}

TEST(Property, RequestHashIgnoresKeyOrder) {
  const auto sa = AgentIdentity::from_seed(61);
  const auto manifest = workload_manifest(default_workload(WorkloadKind::GenAI), sa);
  const auto ua = AgentIdentity::from_seed(62).address();
  const auto a = ServiceRequest::from_json(parse_json(
      R"({"serviceId":"svc.genai.image","params":{"prompt":"p","width":512,"height":768},"requester":")" +
      ua.hex() + R"(","clientNonce":")" + std::string(64, '0') + R"("})"));
  const auto b = ServiceRequest::from_json(parse_json(
      R"({"clientNonce":")" + std::string(64, '0') + R"(","requester":")" + ua.hex() +
      R"(","params":{"height":768,"width":512,"prompt":"p"},"serviceId":"svc.genai.image"})"));
  EXPECT_EQ(compute_request_hash(manifest, a), compute_request_hash(manifest, b));
  EXPECT_EQ(price_request(manifest, a), price_request(manifest, b));
  EXPECT_EQ(price_request(manifest, a), price_request(manifest, a));
}

TEST(Property, BusDeliversOnceAndDeterministically) {
  auto trace = [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<AgentIdentity> ids;
    for (std::uint64_t i = 0; i < 6; ++i) ids.push_back(AgentIdentity::from_seed(100 + i));
    MessageBus bus(LatencyModel{5, 10, 0.0}, seed, 50.0);
    for (const auto& id : ids) bus.register_inbox(id.address());
    std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> nonce;
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::int64_t t = 0; t < 5'000; t += 7) {
      const auto from = static_cast<std::size_t>(rng.uniform_int(0, 5));
      const auto to = static_cast<std::size_t>(rng.uniform_int(0, 5));
      const auto n = ++nonce[{from, to}];
      const auto env = MessageEnvelope::seal(ids[from], ids[to].address(), ThreadId{}, n, t,
                                             PayloadType::Text, Json{{"t", t}});
      bus.send(env, t);
      if (rng.bernoulli(0.1)) bus.send(env, t);
      for (const auto& id : ids) {
        for (const auto& e : bus.receive(id.address(), t)) {
          const auto key = canonicalize(e.to_json());
          EXPECT_TRUE(seen.insert(key).second);
          out.push_back(std::to_string(t) + ":" + key);
        }
      }
    }
    return out;
  };
  EXPECT_EQ(trace(3), trace(3));
  EXPECT_NE(trace(3), trace(4));
}

TEST(Property, TranscriptSetDeterministic) {
  RunConfig c;
  c.trials = 10;
  const auto a = bench_latency(c, {WorkloadKind::Light, WorkloadKind::PipelineK});
  const auto b = bench_latency(c, {WorkloadKind::Light, WorkloadKind::PipelineK});
  auto collect = [](const LatencySection& s) {
    std::vector<const SessionTranscript*> out;
    for (const auto& r : s.runs) {
      for (const auto* t : r.sim->transcripts()) out.push_back(t);
    }
    return transcript_set_hash(out);
  };
  EXPECT_EQ(collect(a), collect(b));
}

TEST(Property, HonestSessionsSettleWithinBound) {
  RunConfig c;
  for (auto kind : {WorkloadKind::Light, WorkloadKind::PipelineK, WorkloadKind::GenAI}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto t = run_session(c, kind, SessionMode::AgentOsi, seed);
      ASSERT_TRUE(t.state.settled()) << t.state.str();
      const std::int64_t bound = t.overlapped.execution_delivery_ms + 2 * c.block_time_ms +
                                 t.overlapped.messaging_ms + 500;
      EXPECT_LE(t.settled_ms - t.start_ms, bound);
      EXPECT_EQ(t.overlapped.messaging_ms + t.overlapped.confirmation_ms + t.overlapped.execution_delivery_ms,
                t.overlapped.total_ms);
      EXPECT_GE(t.overlapped.messaging_ms, 4 * c.bus_latency.min_ms);
      EXPECT_LE(t.overlapped.messaging_ms, 4 * c.bus_latency.max_ms);
    }
  }
}

TEST(Property, ConservationAndSafetyUnderMixedLoad) {
  const auto r = agentosi::testing::run_mixed_load(1'200, 1234);
  EXPECT_GE(r.sessions, 1'000u);
  EXPECT_GT(r.conservation_checks, 10u);
  EXPECT_EQ(r.conservation_violations, 0u);
  EXPECT_EQ(r.double_releases, 0u);
  EXPECT_EQ(r.unsafe_settlements, 0u);
  EXPECT_EQ(r.executed_before_accept, 0u);
  EXPECT_EQ(r.settled + r.failed, r.sessions);
  EXPECT_GT(r.settled, 0u);
  EXPECT_GT(r.failed, 0u);
}
