#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agentosi/error.hpp"

namespace agentosi {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  auto v = as_bytes(s);
  return {v.begin(), v.end()};
}

// Fixed-width byte string. The tag keeps digests, addresses and ids from
// being mixed up at compile time.
template <std::size_t N, class Tag>
class FixedBytes {
 public:
  static constexpr std::size_t kSize = N;

  constexpr FixedBytes() = default;
  explicit FixedBytes(const std::array<std::uint8_t, N>& raw) : raw_(raw) {}

  static FixedBytes from_span(ByteView data) {
    if (data.size() != N) {
      throw Error(Errc::InvalidLength, "expected " + std::to_string(N) + " bytes, got " +
                                           std::to_string(data.size()));
    }
    FixedBytes out;
    std::copy(data.begin(), data.end(), out.raw_.begin());
    return out;
  }

  static FixedBytes from_hex(std::string_view hex) {
    return from_span(agentosi::from_hex(hex));
  }

  const std::array<std::uint8_t, N>& raw() const { return raw_; }
  std::array<std::uint8_t, N>& raw() { return raw_; }
  ByteView view() const { return {raw_.data(), raw_.size()}; }
  const std::uint8_t* data() const { return raw_.data(); }
  std::uint8_t* data() { return raw_.data(); }
  constexpr std::size_t size() const { return N; }

  std::string hex() const { return to_hex(view()); }

  bool is_zero() const {
    return std::all_of(raw_.begin(), raw_.end(), [](std::uint8_t b) { return b == 0; });
  }

  friend bool operator==(const FixedBytes&, const FixedBytes&) = default;
  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;

 private:
  std::array<std::uint8_t, N> raw_{};
};

struct DigestTag {};
struct AddressTag {};
struct ThreadIdTag {};
struct NonceTag {};
struct PublicKeyTag {};

using Digest32 = FixedBytes<32, DigestTag>;
using Address = FixedBytes<20, AddressTag>;
using ThreadId = FixedBytes<16, ThreadIdTag>;
using Nonce32 = FixedBytes<32, NonceTag>;
// Uncompressed SEC1 encoding: 0x04 || X || Y.
using PublicKey = FixedBytes<65, PublicKeyTag>;

struct FixedBytesHash {
  template <std::size_t N, class Tag>
  std::size_t operator()(const FixedBytes<N, Tag>& v) const noexcept {
    std::size_t h = 0;
    std::memcpy(&h, v.data(), std::min(sizeof(h), N));
    return h;
  }
};

}  // namespace agentosi
