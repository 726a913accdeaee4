#ifndef VCATE_JSON_UTIL_H_
#define VCATE_JSON_UTIL_H_

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "vcate/errors.h"

namespace vcate::json_util {

using Json = nlohmann::ordered_json;

inline Json Parse(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kConfigError, what + " is not valid JSON: " + e.what());
  }
}

// Copies j[key] into out when present; type mismatches are ConfigErrors.
template <class T>
void Take(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kConfigError, std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void RejectUnknown(const Json& j, std::initializer_list<const char*> keys,
                          const std::string& where) {
  if (!j.is_object()) Fail(ErrorCode::kConfigError, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) Fail(ErrorCode::kConfigError, "unknown key '" + k + "' in " + where);
  }
}

}  // namespace vcate::json_util

#endif  // VCATE_JSON_UTIL_H_
