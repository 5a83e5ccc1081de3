#pragma once

// Minimal structural JSON-schema checker covering the subset used by the
// shipped schemas: type, properties, required, items, enum, minimum.

#include <string>

#include <nlohmann/json.hpp>

namespace fbmlab::testing {

inline bool type_matches(const nlohmann::json& value, const std::string& t) {
  if (t == "object") return value.is_object();
  if (t == "array") return value.is_array();
  if (t == "string") return value.is_string();
  if (t == "number") return value.is_number();
  if (t == "integer") return value.is_number_integer();
  if (t == "boolean") return value.is_boolean();
  if (t == "null") return value.is_null();
  return false;
}

inline std::string validate_schema(const nlohmann::json& value,
                                   const nlohmann::json& schema,
                                   const std::string& where = "$") {
  if (schema.contains("type") &&
      !type_matches(value, schema["type"].get<std::string>()))
    return where + ": expected type " + schema["type"].get<std::string>();
  if (schema.contains("enum")) {
    bool hit = false;
    for (const auto& e : schema["enum"]) hit = hit || e == value;
    if (!hit) return where + ": value not in enum";
  }
  if (schema.contains("minimum") && value.is_number() &&
      value.get<double>() < schema["minimum"].get<double>())
    return where + ": below minimum";
  if (schema.contains("required"))
    for (const auto& key : schema["required"])
      if (!value.contains(key.get<std::string>()))
        return where + ": missing required key " + key.get<std::string>();
  if (schema.contains("properties") && value.is_object())
    for (const auto& [key, sub] : schema["properties"].items())
      if (value.contains(key)) {
        const std::string err = validate_schema(value[key], sub, where + "." + key);
        if (!err.empty()) return err;
      }
  if (schema.contains("items") && value.is_array())
    for (size_t i = 0; i < value.size(); ++i) {
      const std::string err = validate_schema(
          value[i], schema["items"], where + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
    }
  return "";
}

} // namespace fbmlab::testing
