#include "agentosi/content_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "agentosi/crypto.hpp"

namespace agentosi {

Cid Cid::of(ByteView content) { return Cid(sha256(content)); }

Cid Cid::parse(std::string_view text) {
  constexpr std::string_view kPrefix = "cid:";
  if (text.substr(0, kPrefix.size()) != kPrefix || text.size() != kPrefix.size() + 64) {
    throw Error(Errc::InvalidCid, "expected cid:<64 hex>, got '" + std::string(text) + "'");
  }
  auto hex = text.substr(kPrefix.size());
  if (std::any_of(hex.begin(), hex.end(), [](char c) { return c >= 'A' && c <= 'F'; })) {
    throw Error(Errc::InvalidCid, "cid hex must be lowercase");
  }
  try {
    return Cid(Digest32::from_hex(hex));
  } catch (const Error& e) {
    throw Error(Errc::InvalidCid, e.what());
  }
}

std::int64_t UploadModel::latency_ms(std::size_t size_bytes) const {
  const double mib = static_cast<double>(size_bytes) / (1024.0 * 1024.0);
  return base_ms + static_cast<std::int64_t>(std::llround(static_cast<double>(per_mib_ms) * mib));
}

ContentStore::ContentStore(UploadModel model, std::optional<std::filesystem::path> persist_dir)
    : model_(model), persist_dir_(std::move(persist_dir)) {
  if (persist_dir_) std::filesystem::create_directories(*persist_dir_);
}

PutResult ContentStore::put(ByteView content, std::int64_t now_ms) {
  if (content.empty()) throw Error(Errc::EmptyContent, "cannot store empty content");
  Cid cid = Cid::of(content);
  const std::int64_t done = now_ms + model_.latency_ms(content.size());
  std::lock_guard lock(mutex_);
  auto [it, inserted] = objects_.try_emplace(cid, Object{Bytes(content.begin(), content.end()), done});
  if (!inserted) {
    it->second.available_ms = std::min(it->second.available_ms, done);
  } else if (persist_dir_) {
    std::ofstream out(*persist_dir_ / cid.digest().hex(), std::ios::binary);
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "failed to persist " + cid.str());
  }
  return {cid, it->second.available_ms};
}

Bytes ContentStore::get(const Cid& cid, std::int64_t now_ms) const {
  std::lock_guard lock(mutex_);
  auto it = objects_.find(cid);
  if (it == objects_.end()) throw Error(Errc::NotFound, cid.str());
  if (now_ms < it->second.available_ms) {
    throw Error(Errc::NotYetAvailable, cid.str() + " available at " +
                                           std::to_string(it->second.available_ms));
  }
  if (sha256(it->second.content) != cid.digest()) {
    throw Error(Errc::IntegrityFailure, cid.str());
  }
  return it->second.content;
}

bool ContentStore::contains(const Cid& cid) const {
  std::lock_guard lock(mutex_);
  return objects_.contains(cid);
}

std::size_t ContentStore::size() const {
  std::lock_guard lock(mutex_);
  return objects_.size();
}

void ContentStore::corrupt_for_test(const Cid& cid, std::size_t offset) {
  std::lock_guard lock(mutex_);
  auto it = objects_.find(cid);
  if (it == objects_.end()) throw Error(Errc::NotFound, cid.str());
  it->second.content.at(offset % it->second.content.size()) ^= 0x01;
}

}  // namespace agentosi
