/* Copyright 2026 The ROO Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef ROO_SRC_JSON_UTIL_H_
#define ROO_SRC_JSON_UTIL_H_

// Report-side JSON helpers (not installed).

#include <cstdint>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace roo::internal {

using ReportJson = nlohmann::ordered_json;

// Rounds to `digits` significant digits so reports print stable text.
inline double round_significant(double v, int digits = 6) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

template <typename K, typename V>
ReportJson keyed(const std::map<K, V>& m) {
  ReportJson j = ReportJson::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

template <typename V>
std::map<std::uint64_t, V> unkeyed(const ReportJson& j) {
  std::map<std::uint64_t, V> out;
  for (const auto& [k, v] : j.items()) out[std::stoull(k)] = v.template get<V>();
  return out;
}

ReportJson read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const ReportJson& j);

}  // namespace roo::internal

#endif  // ROO_SRC_JSON_UTIL_H_
