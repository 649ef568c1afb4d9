#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace agentosi {

// Token amount as a 6-decimal fixed-point integer (1.000000 == 1'000'000).
class Amount {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Amount() = default;
  static constexpr Amount from_micros(std::int64_t micros) { return Amount(micros); }
  static constexpr Amount from_units(std::int64_t units) { return Amount(units * kScale); }
  // Parses "0.25", "10", "1.000001". More than six fractional digits is an error.
  static Amount parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  // Always six fractional digits: "0.250000".
  std::string to_string() const;

  constexpr bool is_positive() const { return micros_ > 0; }

  friend constexpr Amount operator+(Amount a, Amount b) { return Amount(a.micros_ + b.micros_); }
  friend constexpr Amount operator-(Amount a, Amount b) { return Amount(a.micros_ - b.micros_); }
  friend constexpr Amount operator*(Amount a, std::int64_t k) { return Amount(a.micros_ * k); }
  Amount& operator+=(Amount o) {
    micros_ += o.micros_;
    return *this;
  }
  Amount& operator-=(Amount o) {
    micros_ -= o.micros_;
    return *this;
  }
  friend constexpr bool operator==(Amount, Amount) = default;
  friend constexpr auto operator<=>(Amount, Amount) = default;

 private:
  constexpr explicit Amount(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace agentosi
