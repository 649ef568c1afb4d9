#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "agentosi/ledger.hpp"

namespace agentosi {

// Receipts loaded from an exported ledger_log.jsonl.
class LogReceiptSource : public ReceiptSource {
 public:
  static LogReceiptSource load(const std::filesystem::path& path);
  static LogReceiptSource parse(std::string_view jsonl);

  std::optional<TxReceipt> find_receipt(const Digest32& tx_hash) const override;
  std::vector<TxReceipt> all_receipts() const override { return receipts_; }
  // Provenance hash recorded by the successful release of quote_id.
  std::optional<Digest32> release_evidence(const Digest32& quote_id) const;

 private:
  std::vector<TxReceipt> receipts_;
  std::map<Digest32, std::size_t> by_hash_;
  std::map<Digest32, Digest32> evidence_;
};

struct AuditFinding {
  std::filesystem::path session_dir;
  std::string reason;
};

struct AuditReport {
  std::size_t runs = 0;
  std::size_t sessions_checked = 0;
  std::size_t sessions_skipped = 0;  // not settled in the transcript
  std::vector<AuditFinding> findings;

  bool ok() const { return runs > 0 && findings.empty(); }
};

// Re-verifies one exported run (a directory holding ledger_log.jsonl).
void audit_run(const std::filesystem::path& run_dir, AuditReport& report);
// Audits every run found beneath root.
AuditReport verify_run_directory(const std::filesystem::path& root);

}  // namespace agentosi
