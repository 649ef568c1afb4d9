#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "agentosi/bytes.hpp"

namespace agentosi {

// Seeded generator with distribution code written out here, so sequences
// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  // Uniform on [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return p > 0.0 && unit() < p; }

  template <class Fixed>
  Fixed fixed_bytes() {
    Fixed out;
    fill(out.data(), out.size());
    return out;
  }

  void fill(std::uint8_t* out, std::size_t n) {
    std::size_t i = 0;
    while (i < n) {
      std::uint64_t word = next();
      for (int b = 0; b < 8 && i < n; ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(word >> (8 * b));
      }
    }
  }

  // Child generator for an independent stream, e.g. one per subsystem.
  Rng fork() { return Rng(next() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace agentosi
