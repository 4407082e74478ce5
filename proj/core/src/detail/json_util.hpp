#pragma once

#include <string>
#include <string_view>

#include "archrecon/error.hpp"
#include "json.hpp"

namespace archrecon::detail {

using nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, std::string(what) + ": invalid JSON: " + e.what());
  }
}

// Field access that reports schema violations with the document name.
template <class T>
T require(const json& obj, const char* key, std::string_view what) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorKind::SchemaViolation,
                std::string(what) + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::SchemaViolation,
                std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace archrecon::detail
