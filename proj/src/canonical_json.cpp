#include "agentosi/canonical_json.hpp"

#include <cmath>

namespace agentosi {

namespace {

void check_canonicalizable(const Json& value) {
  switch (value.type()) {
    case Json::value_t::number_float:
      if (!std::isfinite(value.get<double>())) {
        throw Error(Errc::NonCanonicalizable, "non-finite number");
      }
      break;
    case Json::value_t::object:
      for (const auto& [key, child] : value.items()) {
        check_canonicalizable(child);
      }
      break;
    case Json::value_t::array:
      for (const auto& child : value) {
        check_canonicalizable(child);
      }
      break;
    case Json::value_t::binary:
    case Json::value_t::discarded:
      throw Error(Errc::NonCanonicalizable, "value has no JSON text form");
    default:
      break;
  }
}

}  // namespace

std::string canonicalize(const Json& value) {
  check_canonicalizable(value);
  // nlohmann::json objects are std::map<std::string, ...>; std::string
  // ordering compares as unsigned char, i.e. bytewise on the UTF-8 encoding.
  try {
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::NonCanonicalizable, e.what());
  }
}

Bytes canonical_bytes(const Json& value) { return to_bytes(canonicalize(value)); }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedObject, e.what());
  }
}

const Json& require(const Json& obj, std::string_view key) {
  if (!obj.is_object()) {
    throw Error(Errc::MalformedObject, "expected object while reading '" + std::string(key) + "'");
  }
  auto it = obj.find(std::string(key));
  if (it == obj.end()) {
    throw Error(Errc::MalformedObject, "missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const Json& obj, std::string_view key) {
  const Json& v = require(obj, key);
  if (!v.is_string()) {
    throw Error(Errc::MalformedObject, "field '" + std::string(key) + "' is not a string");
  }
  return v.get<std::string>();
}

std::int64_t require_int(const Json& obj, std::string_view key) {
  const Json& v = require(obj, key);
  if (!v.is_number_integer()) {
    throw Error(Errc::MalformedObject, "field '" + std::string(key) + "' is not an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t require_uint(const Json& obj, std::string_view key) {
  const Json& v = require(obj, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw Error(Errc::MalformedObject,
                "field '" + std::string(key) + "' is not a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace agentosi
