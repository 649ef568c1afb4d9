#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "agentosi/audit.hpp"
#include "agentosi/bench.hpp"
#include "agentosi/canonical_json.hpp"
#include "agentosi/config.hpp"
#include "agentosi/crypto.hpp"
#include "agentosi/error.hpp"
#include "agentosi/session.hpp"
#include "agentosi/vectors.hpp"

namespace py = pybind11;
using namespace agentosi;

namespace {

RunConfig config_from(const std::string& overlay) {
  RunConfig c = overlay.empty() ? RunConfig{} : RunConfig::from_json(parse_json(overlay));
  c.validate();
  return c;
}

std::string run_session_json(const std::string& overlay, const std::string& workload, const std::string& mode,
                             std::uint64_t seed) {
  const auto c = config_from(overlay);
  py::gil_scoped_release release;
  return run_session(c, parse_workload_kind(workload), parse_session_mode(mode), seed).to_json().dump();
}

std::string bench_json(const std::string& overlay, const std::vector<std::string>& sections,
                       const std::string& out_dir) {
  const auto c = config_from(overlay);
  py::gil_scoped_release release;
  BenchReport r;
  r.config = c;
  for (const auto& s : sections) {
    if (s == "cost") {
      r.cost = bench_cost(c);
    } else if (s == "latency") {
      r.latency = bench_latency(c);
    } else if (s == "throughput") {
      r.throughput = bench_throughput(c);
    } else {
      throw Error(Errc::Config, "unknown bench section " + s);
    }
  }
  if (!out_dir.empty()) {
    r.write(out_dir);
    std::vector<const SimulationRun*> runs;
    if (r.cost) for (const auto& run : r.cost->runs) runs.push_back(&run);
    if (r.latency) for (const auto& run : r.latency->runs) runs.push_back(&run);
    if (!runs.empty()) export_runs(out_dir, c.seed, runs, false);
  }
  auto j = r.to_json();
  j["transcriptSetHash"] = r.transcript_set_hash().hex();
  return j.dump();
}

py::dict verify_dir(const std::string& root) {
  AuditReport r;
  {
    py::gil_scoped_release release;
    r = verify_run_directory(root);
  }
  py::list findings;
  for (const auto& f : r.findings) findings.append(py::make_tuple(f.session_dir.string(), f.reason));
  py::dict d;
  d["ok"] = r.ok();
  d["runs"] = r.runs;
  d["sessions_checked"] = r.sessions_checked;
  d["sessions_skipped"] = r.sessions_skipped;
  d["findings"] = findings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_agentosi, m) {
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("default_config", [] { return RunConfig{}.to_json().dump(); });
  m.def("run_session", &run_session_json, py::arg("config"), py::arg("workload"), py::arg("mode"),
        py::arg("seed"));
  m.def("bench", &bench_json, py::arg("config"), py::arg("sections"), py::arg("out_dir") = "");
  m.def("verify", &verify_dir, py::arg("root"));
  m.def("sha256", [](py::bytes data) {
    const std::string s = data;
    return sha256(std::string_view(s)).hex();
  });
  m.def("canonicalize", [](const std::string& text) { return canonicalize(parse_json(text)); });
  m.def("identity", [](std::uint64_t seed) {
    const auto id = AgentIdentity::from_seed(seed);
    return py::make_tuple(id.address().hex(), id.public_key().hex());
  });
  m.def("check_vectors", [](const std::string& text) { return check_vectors(parse_json(text)); });
}
