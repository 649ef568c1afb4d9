#include "agentosi/audit.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "agentosi/canonical_json.hpp"
#include "agentosi/capability.hpp"
#include "agentosi/error.hpp"
#include "agentosi/provenance.hpp"
#include "agentosi/settlement.hpp"

namespace agentosi {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedObject, path.filename().string() + ": " + e.what());
  }
}

std::string describe(std::string_view what, const Verdict& v) {
  std::string out(what);
  out += ": ";
  out += v.reason ? reject_reason_name(*v.reason) : "rejected";
  if (!v.detail.empty()) out += " (" + v.detail + ")";
  return out;
}

}  // namespace

LogReceiptSource LogReceiptSource::load(const fs::path& path) { return parse(read_file(path)); }

LogReceiptSource LogReceiptSource::parse(std::string_view jsonl) {
  LogReceiptSource src;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(Errc::MalformedObject, std::string("ledger log: ") + e.what());
    }
    auto r = TxReceipt::from_json(j);
    src.by_hash_[r.tx_hash] = src.receipts_.size();
    if (r.success()) {
      for (const auto& ev : r.decode_events()) {
        if (const auto* rel = std::get_if<EscrowReleasedEvent>(&ev)) {
          src.evidence_[rel->quote_id] = rel->provenance_hash;
        }
      }
    }
    src.receipts_.push_back(std::move(r));
  }
  return src;
}

std::optional<TxReceipt> LogReceiptSource::find_receipt(const Digest32& tx_hash) const {
  auto it = by_hash_.find(tx_hash);
  if (it == by_hash_.end()) return std::nullopt;
  return receipts_[it->second];
}

std::optional<Digest32> LogReceiptSource::release_evidence(const Digest32& quote_id) const {
  auto it = evidence_.find(quote_id);
  if (it == evidence_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Empty string when the session passes.
std::string audit_session(const fs::path& dir, const LogReceiptSource& log,
                          std::set<Digest32>& seen_quotes) {
  const auto request = ServiceRequest::from_json(read_json(dir / "request.json"));
  const auto quote = Quote::from_json(read_json(dir / "quote.json"));
  const auto receipt = Receipt::from_json(read_json(dir / "receipt.json"));
  const auto exec_log = ExecutionLog::from_json(read_json(dir / "exec_log.json"));
  const std::string raw_provenance = read_file(dir / "provenance.json");
  const auto transcript = read_json(dir / "transcript.json");

  ProvenanceArtifact artifact;
  try {
    artifact = ProvenanceArtifact::from_json(Json::parse(raw_provenance));
  } catch (const Json::exception& e) {
    return std::string("provenance.json: ") + e.what();
  }
  Bytes delivered;
  if (fs::exists(dir / "delivered.bin")) {
    const auto s = read_file(dir / "delivered.bin");
    delivered.assign(s.begin(), s.end());
  }

  if (!quote.signature_valid()) return "SignerMismatch: quote signature";
  if (request_digest(request) != quote.request_hash) return "BindingMismatch: request hash";
  const auto qid = quote_id(quote);
  if (!seen_quotes.insert(qid).second) return "AlreadyConsumed: quote id reused";

  const auto rv = verify_receipt(log, receipt, quote, request.requester,
                                 std::numeric_limits<std::int64_t>::max());
  if (!rv.accepted) return describe("receipt", rv);
  const auto pv = verify_provenance(artifact, quote, receipt, delivered);
  if (!pv) return describe("provenance", pv.verdict);
  const auto lv = verify_exec_log(artifact, exec_log);
  if (!lv.accepted) return describe("exec log", lv);

  if (canonicalize(artifact.to_json()) != raw_provenance) {
    return "MalformedObject: provenance.json is not canonical";
  }
  const auto ph = sha256(as_bytes(raw_provenance));
  const auto evidence = log.release_evidence(qid);
  if (!evidence) return "escrow not released in ledger log";
  if (*evidence != ph) return "release evidence does not match provenance.json";
  const auto& arts = transcript.value("artifacts", Json::object());
  if (arts.value("provenanceHash", std::string()) != ph.hex()) {
    return "transcript provenance hash does not match provenance.json";
  }
  return {};
}

}  // namespace

void audit_run(const fs::path& run_dir, AuditReport& report) {
  ++report.runs;
  LogReceiptSource log;
  try {
    log = LogReceiptSource::load(run_dir / "ledger_log.jsonl");
  } catch (const Error& e) {
    report.findings.push_back({run_dir, e.what()});
    return;
  }
  const auto sessions = run_dir / "sessions";
  if (!fs::is_directory(sessions)) return;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(sessions)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::set<Digest32> seen;
  for (const auto& dir : dirs) {
    try {
      const auto transcript = read_json(dir / "transcript.json");
      if (transcript.value("finalState", std::string()) != "Settled") {
        ++report.sessions_skipped;
        continue;
      }
      ++report.sessions_checked;
      auto reason = audit_session(dir, log, seen);
      if (!reason.empty()) report.findings.push_back({dir, std::move(reason)});
    } catch (const std::exception& e) {
      report.findings.push_back({dir, e.what()});
    }
  }
}

AuditReport verify_run_directory(const fs::path& root) {
  AuditReport report;
  if (!fs::is_directory(root)) return report;
  std::vector<fs::path> runs;
  if (fs::exists(root / "ledger_log.jsonl")) runs.push_back(root);
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "ledger_log.jsonl" &&
        e.path().parent_path() != root) {
      runs.push_back(e.path().parent_path());
    }
  }
  std::sort(runs.begin(), runs.end());
  for (const auto& r : runs) audit_run(r, report);
  return report;
}

}  // namespace agentosi
