#pragma once

#include <json.hpp>
#include <set>
#include <string>
#include <vector>

#include "cvcouple/errors.hpp"

namespace cvcouple::jsonf {

using json = nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

/// Rejects keys outside `allowed`.
inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  require_object(j, path);
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(join(path, k) + ": unknown key");
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(join(path, key) + ": missing");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

inline double number(const json& j, const std::string& key, const std::string& path) {
  return number(require(j, key, path), join(path, key));
}

inline double number_or(const json& j, const std::string& key, double def, const std::string& path) {
  return j.contains(key) ? number(j.at(key), join(path, key)) : def;
}

inline double positive(const json& j, const std::string& key, const std::string& path) {
  const double v = number(j, key, path);
  if (!(v > 0.0)) throw ConfigError(join(path, key) + ": must be positive");
  return v;
}

inline double positive_or(const json& j, const std::string& key, double def, const std::string& path) {
  if (!j.contains(key)) return def;
  return positive(j, key, path);
}

inline double non_negative_or(const json& j, const std::string& key, double def,
                              const std::string& path) {
  const double v = number_or(j, key, def, path);
  if (!(v >= 0.0)) throw ConfigError(join(path, key) + ": must be non-negative");
  return v;
}

inline int integer_or(const json& j, const std::string& key, int def, const std::string& path) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  return v.get<int>();
}

inline std::string string(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

inline std::string string_or(const json& j, const std::string& key, const std::string& def,
                             const std::string& path) {
  return j.contains(key) ? string(j, key, path) : def;
}

inline bool boolean_or(const json& j, const std::string& key, bool def, const std::string& path) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
  return j.at(key).get<bool>();
}

/// Scalar or array of numbers.
inline std::vector<double> numbers(const json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty())
    throw ConfigError(join(path, key) + ": expected a number or a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], join(path, key) + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace cvcouple::jsonf
