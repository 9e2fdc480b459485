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


#include "roo/audit.h"

#include <set>
#include <tuple>

#include "json_util.h"
#include "roo/pipeline.h"

namespace roo {
namespace {

using Key = std::pair<RequestId, ItemId>;

struct Side {
  std::set<Key> keys;
  std::set<std::tuple<RequestId, ItemId, FeatureId>> features;
  std::map<LabelId, std::set<Key>> labels;
};

Side index(const std::vector<ImpressionSample>& samples) {
  Side s;
  for (const ImpressionSample& x : samples) {
    const Key key{x.request_id, x.item_id};
    s.keys.insert(key);
    for (const auto& [f, v] : x.dense_features) s.features.emplace(key.first, key.second, f);
    for (const auto& [f, v] : x.idlist_features) s.features.emplace(key.first, key.second, f);
    for (const auto& [f, v] : x.idscorelist_features) {
      s.features.emplace(key.first, key.second, f);
    }
    for (LabelId l : x.conversions) s.labels[l].insert(key);
  }
  return s;
}

// |a & b| / |a | b|, 1 when both are empty.
template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b, std::uint64_t* sym = nullptr,
               std::uint64_t* uni = nullptr) {
  std::uint64_t both = 0;
  for (const T& x : a) both += b.count(x);
  const std::uint64_t either = a.size() + b.size() - both;
  if (sym != nullptr) *sym = either - both;
  if (uni != nullptr) *uni = either;
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace

AuditReport audit_samples(const std::vector<ImpressionSample>& left,
                          const std::vector<ImpressionSample>& right) {
  const Side l = index(left);
  const Side r = index(right);
  AuditReport report;
  report.left_samples = left.size();
  report.right_samples = right.size();
  report.sample_coverage = jaccard(l.keys, r.keys);
  report.feature_coverage = jaccard(l.features, r.features);
  std::set<LabelId> labels;
  for (const auto& [label, keys] : l.labels) labels.insert(label);
  for (const auto& [label, keys] : r.labels) labels.insert(label);
  static const std::set<Key> kNone;
  for (LabelId label : labels) {
    auto li = l.labels.find(label);
    auto ri = r.labels.find(label);
    std::uint64_t sym = 0, uni = 0;
    jaccard(li == l.labels.end() ? kNone : li->second,
            ri == r.labels.end() ? kNone : ri->second, &sym, &uni);
    report.mismatched[label] = sym;
    report.observed[label] = uni;
    report.mismatch_rate[label] =
        uni == 0 ? 0.0 : static_cast<double>(sym) / static_cast<double>(uni);
  }
  return report;
}

AuditReport audit_runs(const std::filesystem::path& left_run,
                       const std::filesystem::path& right_run) {
  const RunManifest lm = read_manifest(left_run);
  const RunManifest rm = read_manifest(right_run);
  if (lm.stream_hash != rm.stream_hash) {
    throw AuditError("runs were produced from different streams (" +
                     lm.stream_hash + " vs " + rm.stream_hash + ")");
  }
  AuditReport report =
      audit_samples(load_run_impressions(left_run), load_run_impressions(right_run));
  report.stream_hash = lm.stream_hash;
  return report;
}

std::string audit_to_json(const AuditReport& r) {
  internal::ReportJson j;
  j["stream_hash"] = r.stream_hash;
  internal::ReportJson rates = internal::ReportJson::object();
  for (const auto& [label, rate] : r.mismatch_rate) {
    rates[std::to_string(label)] = internal::round_significant(rate);
  }
  j["mismatch_rate"] = rates;
  j["mismatched"] = internal::keyed(r.mismatched);
  j["observed"] = internal::keyed(r.observed);
  j["sample_coverage"] = internal::round_significant(r.sample_coverage);
  j["feature_coverage"] = internal::round_significant(r.feature_coverage);
  j["left_samples"] = r.left_samples;
  j["right_samples"] = r.right_samples;
  return j.dump(2);
}

}  // namespace roo
