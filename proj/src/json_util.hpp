#pragma once

// Internal helpers shared by the JSON readers and writers.

#include <cmath>
#include <string>
#include <string_view>

#include <json.hpp>

#include "slidesync/error.hpp"

namespace slidesync::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Rounds to 6 decimal places so textual output is stable and short.
inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline const json& require(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw SchemaError(ctx, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(ctx + "." + key, "required field missing");
  return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& ctx) {
  const json& v = require(obj, key, ctx);
  if (!v.is_string()) throw SchemaError(ctx + "." + key, "must be a string");
  return v.get<std::string>();
}

inline double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw SchemaError(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(field, "must be finite");
  return d;
}

inline double require_number(const json& obj, const char* key, const std::string& ctx) {
  return as_number(require(obj, key, ctx), ctx + "." + key);
}

inline std::string optional_string(const json& obj, const char* key, const std::string& ctx,
                                   std::string fallback = {}) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw SchemaError(ctx + "." + key, "must be a string");
  return it->get<std::string>();
}

inline const json& require_array(const json& obj, const char* key, const std::string& ctx) {
  const json& v = require(obj, key, ctx);
  if (!v.is_array()) throw SchemaError(ctx + "." + key, "must be an array");
  return v;
}

}  // namespace slidesync::detail
