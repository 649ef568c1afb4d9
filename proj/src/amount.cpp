#include "agentosi/amount.hpp"

#include <cstdlib>

#include "agentosi/error.hpp"

namespace agentosi {

Amount Amount::parse(std::string_view text) {
  if (text.empty()) throw Error(Errc::MalformedObject, "empty amount");
  bool negative = false;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 6 || (dot != std::string_view::npos && frac.empty())) {
    throw Error(Errc::MalformedObject, "bad amount '" + std::string(text) + "'");
  }
  std::int64_t units = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') throw Error(Errc::MalformedObject, "bad amount digit");
    units = units * 10 + (c - '0');
  }
  std::int64_t micros = 0;
  std::int64_t scale = kScale / 10;
  for (char c : frac) {
    if (c < '0' || c > '9') throw Error(Errc::MalformedObject, "bad amount digit");
    micros += (c - '0') * scale;
    scale /= 10;
  }
  std::int64_t total = units * kScale + micros;
  return Amount(negative ? -total : total);
}

std::string Amount::to_string() const {
  std::int64_t v = micros_ < 0 ? -micros_ : micros_;
  std::string frac = std::to_string(v % kScale);
  frac.insert(0, 6 - frac.size(), '0');
  return (micros_ < 0 ? "-" : "") + std::to_string(v / kScale) + "." + frac;
}

}  // namespace agentosi
