#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "agentosi/bytes.hpp"

namespace agentosi {

using Json = nlohmann::json;

// Canonical form: UTF-8, object keys sorted bytewise, no insignificant
// whitespace, integers in plain decimal. Throws Errc::NonCanonicalizable on
// NaN/Infinity or invalid UTF-8.
std::string canonicalize(const Json& value);
Bytes canonical_bytes(const Json& value);

// Strict parse; throws Errc::MalformedObject on syntax errors.
Json parse_json(std::string_view text);

// Field accessors that report missing or mistyped members as
// Errc::MalformedObject instead of nlohmann exceptions.
const Json& require(const Json& obj, std::string_view key);
std::string require_string(const Json& obj, std::string_view key);
std::int64_t require_int(const Json& obj, std::string_view key);
std::uint64_t require_uint(const Json& obj, std::string_view key);

template <class Fixed>
Fixed require_fixed(const Json& obj, std::string_view key) {
  try {
    return Fixed::from_hex(require_string(obj, key));
  } catch (const Error& e) {
    throw Error(Errc::MalformedObject, "field '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace agentosi
