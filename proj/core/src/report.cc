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


#include "roo/report.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json_util.h"

namespace roo {
namespace internal {

ReportJson read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return ReportJson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const ReportJson& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace internal

namespace {

using internal::ReportJson;

void flatten(const std::string& prefix, const ReportJson& j,
             std::vector<std::pair<std::string, std::string>>* rows) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      flatten(prefix.empty() ? k : prefix + "." + k, v, rows);
    }
  } else if (j.is_string()) {
    rows->emplace_back(prefix, j.get<std::string>());
  } else if (j.is_number_float()) {
    rows->emplace_back(prefix, ReportJson(internal::round_significant(j.get<double>())).dump());
  } else {
    rows->emplace_back(prefix, j.dump());
  }
}

}  // namespace

Report build_report(const std::vector<std::filesystem::path>& dirs) {
  std::vector<std::filesystem::path> ordered;
  std::vector<std::filesystem::path> others;
  ReportJson runs = ReportJson::array();
  for (const auto& d : dirs) {
    if (!std::filesystem::is_directory(d)) {
      throw std::runtime_error("missing input directory " + d.string());
    }
    if (std::filesystem::exists(d / "manifest.json")) {
      ReportJson m = internal::read_json_file(d / "manifest.json");
      ReportJson entry;
      entry["dir"] = d.filename().string();
      for (const char* k : {"mode", "stream_hash", "run_id", "samples", "impressions",
                            "batches"}) {
        if (m.contains(k)) entry[k] = m[k];
      }
      runs.push_back(entry);
      (m.value("mode", "") == "roo" ? ordered : others).push_back(d);
    } else {
      others.push_back(d);
    }
  }
  if (runs.empty()) {
    throw std::runtime_error("report: no run manifest found in the given directories");
  }
  ordered.insert(ordered.end(), others.begin(), others.end());

  auto section = [&](const char* file) {
    for (const auto& d : ordered) {
      if (std::filesystem::exists(d / file)) return internal::read_json_file(d / file);
    }
    ReportJson absent;
    absent["status"] = "absent";
    return absent;
  };

  ReportJson j;
  j["runs"] = runs;
  j["footprint"] = section("footprint.json");
  j["latency"] = section("joiner_metrics.json");
  j["cost"] = section("cost.json");
  j["audit"] = section("audit.json");

  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    flatten("runs." + std::to_string(i), runs[i], &rows);
  }
  for (const char* s : {"footprint", "latency", "cost", "audit"}) flatten(s, j[s], &rows);
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::ostringstream table;
  for (const auto& [k, v] : rows) {
    table << k << std::string(width - k.size() + 2, ' ') << v << '\n';
  }
  return {j.dump(2) + "\n", table.str()};
}

}  // namespace roo
