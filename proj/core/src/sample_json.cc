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

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>

#include "roo/jsonl.h"

namespace roo {
namespace {

// f32 storage so that dumps print the shortest f32 round-trip text.
using Json = nlohmann::basic_json<nlohmann::ordered_map, std::vector,
                                  std::string, bool, std::int64_t,
                                  std::uint64_t, float>;

FeatureId parse_key(const std::string& key) {
  FeatureId id = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
  if (ec != std::errc() || ptr != key.data() + key.size()) {
    throw ParseError("feature key is not an unsigned integer: '" + key + "'");
  }
  return id;
}

template <typename V, typename F>
Json encode_map(const std::map<FeatureId, V>& m, F&& encode_value) {
  Json obj = Json::object();
  for (const auto& [id, v] : m) obj[std::to_string(id)] = encode_value(v);
  return obj;
}

template <typename V, typename F>
std::map<FeatureId, V> decode_map(const Json& obj, F&& decode_value) {
  if (!obj.is_object()) throw ParseError("expected a JSON object of features");
  std::map<FeatureId, V> out;
  for (const auto& [key, v] : obj.items()) {
    if (!out.emplace(parse_key(key), decode_value(v)).second) {
      throw ParseError("duplicate feature key " + key);
    }
  }
  return out;
}

auto identity = [](const auto& v) { return Json(v); };

float as_float(const Json& j) {
  if (!j.is_number()) throw ParseError("expected a number, got " + j.dump());
  return j.get<float>();
}

std::uint64_t as_u64(const Json& j) {
  if (!j.is_number_unsigned()) {
    throw ParseError("expected an unsigned integer, got " + j.dump());
  }
  return j.get<std::uint64_t>();
}

std::vector<std::uint64_t> as_ids(const Json& j) {
  if (!j.is_array()) throw ParseError("expected an array of ids");
  std::vector<std::uint64_t> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_u64(v));
  return out;
}

std::vector<LabelId> as_labels(const Json& j) {
  std::vector<LabelId> out;
  for (auto id : as_ids(j)) {
    if (id > std::numeric_limits<LabelId>::max()) {
      throw ParseError("label id out of range: " + std::to_string(id));
    }
    out.push_back(static_cast<LabelId>(id));
  }
  return out;
}

const Json& field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

Json parse(std::string_view line) {
  try {
    Json j = Json::parse(line.begin(), line.end());
    if (!j.is_object()) throw ParseError("expected a JSON object per line");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

Json encode_dense(const DenseMap& m) { return encode_map(m, identity); }
Json encode_idlist(const IdListMap& m) { return encode_map(m, identity); }
DenseMap decode_dense(const Json& j) { return decode_map<float>(j, as_float); }
IdListMap decode_idlist(const Json& j) {
  return decode_map<std::vector<std::uint64_t>>(j, as_ids);
}

}  // namespace

std::string check_event(const Event& e) {
  if (e.kind == EventKind::kConversion) {
    if (e.item_labels.empty()) return "conversion event carries no labels";
    if (!e.ro_dense.empty() || !e.ro_idlist.empty() || !e.nro_dense.empty() ||
        !e.nro_idlist.empty()) {
      return "conversion event carries feature payloads";
    }
  } else if (!e.item_labels.empty()) {
    return "impression event carries labels";
  }
  return {};
}

std::string to_json_line(const RequestSample& s) {
  Json j;
  j["request_id"] = s.request_id;
  j["user_id"] = s.user_id;
  j["items"] = s.items;
  j["conversions"] = s.conversions;
  j["ro_dense"] = encode_dense(s.ro_dense);
  j["ro_idlist"] = encode_idlist(s.ro_idlist);
  j["nro_dense"] = encode_map(s.nro_dense, identity);
  j["nro_idlist"] = encode_map(s.nro_idlist, identity);
  return j.dump();
}

std::string to_json_line(const ImpressionSample& s) {
  Json j;
  j["request_id"] = s.request_id;
  j["user_id"] = s.user_id;
  j["item_id"] = s.item_id;
  j["conversions"] = s.conversions;
  j["dense_features"] = encode_dense(s.dense_features);
  j["idlist_features"] = encode_idlist(s.idlist_features);
  j["idscorelist_features"] =
      encode_map(s.idscorelist_features, [](const auto& scores) {
        Json obj = Json::object();
        for (const auto& [id, w] : scores) obj[std::to_string(id)] = w;
        return obj;
      });
  return j.dump();
}

std::string to_json_line(const Event& e) {
  Json j;
  j["event_time"] = e.event_time;
  j["user_id"] = e.user_id;
  j["request_id"] = e.request_id;
  j["item_id"] = e.item_id;
  j["kind"] = e.kind == EventKind::kImpression ? "impression" : "conversion";
  j["item_labels"] = e.item_labels;
  if (e.kind == EventKind::kImpression) {
    j["ro_payload"] = {{"dense", encode_dense(e.ro_dense)},
                       {"idlist", encode_idlist(e.ro_idlist)}};
    j["nro_payload"] = {{"dense", encode_dense(e.nro_dense)},
                        {"idlist", encode_idlist(e.nro_idlist)}};
  }
  j["expected_events"] = e.expected_events;
  return j.dump();
}

RequestSample request_sample_from_json(std::string_view line) {
  Json j = parse(line);
  RequestSample s;
  s.request_id = as_u64(field(j, "request_id"));
  s.user_id = as_u64(field(j, "user_id"));
  s.items = as_ids(field(j, "items"));
  const Json& conv = field(j, "conversions");
  if (!conv.is_array()) throw ParseError("conversions must be an array");
  for (const auto& c : conv) s.conversions.push_back(as_labels(c));
  s.ro_dense = decode_dense(field(j, "ro_dense"));
  s.ro_idlist = decode_idlist(field(j, "ro_idlist"));
  s.nro_dense = decode_map<std::vector<float>>(field(j, "nro_dense"),
                                               [](const Json& a) {
    if (!a.is_array()) throw ParseError("nro_dense values must be arrays");
    std::vector<float> out;
    for (const auto& v : a) out.push_back(as_float(v));
    return out;
  });
  s.nro_idlist = decode_map<std::vector<std::vector<std::uint64_t>>>(
      field(j, "nro_idlist"), [](const Json& a) {
        if (!a.is_array()) throw ParseError("nro_idlist values must be arrays");
        std::vector<std::vector<std::uint64_t>> out;
        for (const auto& v : a) out.push_back(as_ids(v));
        return out;
      });
  return s;
}

ImpressionSample impression_sample_from_json(std::string_view line) {
  Json j = parse(line);
  ImpressionSample s;
  s.request_id = as_u64(field(j, "request_id"));
  s.user_id = as_u64(field(j, "user_id"));
  s.item_id = as_u64(field(j, "item_id"));
  s.conversions = as_labels(field(j, "conversions"));
  s.dense_features = decode_dense(field(j, "dense_features"));
  s.idlist_features = decode_idlist(field(j, "idlist_features"));
  if (auto it = j.find("idscorelist_features"); it != j.end()) {
    s.idscorelist_features = decode_map<std::map<std::uint64_t, float>>(
        *it, [](const Json& obj) {
          std::map<std::uint64_t, float> out;
          for (const auto& [k, w] : decode_dense(obj)) out.emplace(k, w);
          return out;
        });
  }
  return s;
}

Event event_from_json(std::string_view line) {
  Json j = parse(line);
  Event e;
  const Json& t = field(j, "event_time");
  if (!t.is_number_integer()) throw ParseError("event_time must be an integer");
  e.event_time = t.get<std::int64_t>();
  e.user_id = as_u64(field(j, "user_id"));
  e.request_id = as_u64(field(j, "request_id"));
  e.item_id = as_u64(field(j, "item_id"));
  const Json& kind = field(j, "kind");
  if (kind == "impression") {
    e.kind = EventKind::kImpression;
  } else if (kind == "conversion") {
    e.kind = EventKind::kConversion;
  } else {
    throw ParseError("unknown event kind " + kind.dump());
  }
  if (auto it = j.find("item_labels"); it != j.end()) {
    e.item_labels = as_labels(*it);
  }
  if (auto it = j.find("ro_payload"); it != j.end()) {
    e.ro_dense = decode_dense(field(*it, "dense"));
    e.ro_idlist = decode_idlist(field(*it, "idlist"));
  }
  if (auto it = j.find("nro_payload"); it != j.end()) {
    e.nro_dense = decode_dense(field(*it, "dense"));
    e.nro_idlist = decode_idlist(field(*it, "idlist"));
  }
  if (auto it = j.find("expected_events"); it != j.end()) {
    std::uint64_t n = as_u64(*it);
    if (n > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError("expected_events out of range");
    }
    e.expected_events = static_cast<std::uint32_t>(n);
  }
  if (auto problem = check_event(e); !problem.empty()) {
    throw ParseError("malformed event for request " +
                     std::to_string(e.request_id) + ": " + problem);
  }
  return e;
}

template <typename T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (const T& row : rows) out << to_json_line(row) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template void write_jsonl(const std::filesystem::path&,
                          const std::vector<RequestSample>&);
template void write_jsonl(const std::filesystem::path&,
                          const std::vector<ImpressionSample>&);
template void write_jsonl(const std::filesystem::path&,
                          const std::vector<Event>&);

namespace {

template <typename T, typename F>
std::vector<T> read_lines(const std::filesystem::path& path, F&& decode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(decode(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<RequestSample> read_request_samples(const std::filesystem::path& p) {
  return read_lines<RequestSample>(p, request_sample_from_json);
}

std::vector<ImpressionSample> read_impression_samples(
    const std::filesystem::path& p) {
  return read_lines<ImpressionSample>(p, impression_sample_from_json);
}

std::vector<Event> read_events(const std::filesystem::path& p) {
  return read_lines<Event>(p, event_from_json);
}

}  // namespace roo
