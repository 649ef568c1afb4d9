#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "agentosi/bytes.hpp"

namespace agentosi {

// "cid:" followed by the lowercase hex sha256 of the content.
class Cid {
 public:
  Cid() = default;
  explicit Cid(const Digest32& digest) : digest_(digest) {}

  static Cid of(ByteView content);
  // Throws Errc::InvalidCid.
  static Cid parse(std::string_view text);

  const Digest32& digest() const { return digest_; }
  std::string str() const { return "cid:" + digest_.hex(); }

  friend bool operator==(const Cid&, const Cid&) = default;
  friend auto operator<=>(const Cid&, const Cid&) = default;

 private:
  Digest32 digest_;
};

struct UploadModel {
  std::int64_t base_ms = 50;
  std::int64_t per_mib_ms = 20;

  std::int64_t latency_ms(std::size_t size_bytes) const;
};

struct PutResult {
  Cid cid;
  std::int64_t completion_ms = 0;
};

class ContentStore {
 public:
  explicit ContentStore(UploadModel model = {},
                        std::optional<std::filesystem::path> persist_dir = std::nullopt);

  // Throws Errc::EmptyContent.
  PutResult put(ByteView content, std::int64_t now_ms);
  // Throws Errc::NotFound, Errc::NotYetAvailable or Errc::IntegrityFailure.
  Bytes get(const Cid& cid, std::int64_t now_ms) const;

  bool contains(const Cid& cid) const;
  std::size_t size() const;
  const UploadModel& upload_model() const { return model_; }

  // Test hook: flips one byte of a stored object in place.
  void corrupt_for_test(const Cid& cid, std::size_t offset = 0);

 private:
  struct Object {
    Bytes content;
    std::int64_t available_ms;
  };

  UploadModel model_;
  std::optional<std::filesystem::path> persist_dir_;
  std::map<Cid, Object> objects_;
  mutable std::mutex mutex_;
};

}  // namespace agentosi
