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

#include "roo/schema.h"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace roo {

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kRoDense:
      return "ro_dense";
    case FeatureKind::kRoIdList:
      return "ro_idlist";
    case FeatureKind::kNroDense:
      return "nro_dense";
    case FeatureKind::kNroIdList:
      return "nro_idlist";
  }
  return "unknown";
}

bool is_request_only(FeatureKind kind) {
  return kind == FeatureKind::kRoDense || kind == FeatureKind::kRoIdList;
}

void FeatureRegistry::add(FeatureKind kind, FeatureId id, FeatureMeta meta) {
  if (auto it = kinds_.find(id); it != kinds_.end()) {
    throw std::invalid_argument("feature " + std::to_string(id) +
                                " already registered as " +
                                to_string(it->second));
  }
  kinds_.emplace(id, kind);
  meta_.emplace(id, meta);
  switch (kind) {
    case FeatureKind::kRoDense:
      ro_dense_.insert(id);
      break;
    case FeatureKind::kRoIdList:
      ro_idlist_.insert(id);
      break;
    case FeatureKind::kNroDense:
      nro_dense_.insert(id);
      break;
    case FeatureKind::kNroIdList:
      nro_idlist_.insert(id);
      break;
  }
}

std::optional<FeatureKind> FeatureRegistry::kind_of(FeatureId id) const {
  auto it = kinds_.find(id);
  if (it == kinds_.end()) return std::nullopt;
  return it->second;
}

const FeatureMeta& FeatureRegistry::meta(FeatureId id) const {
  auto it = meta_.find(id);
  if (it == meta_.end()) {
    throw std::out_of_range("feature " + std::to_string(id) +
                            " is not registered");
  }
  return it->second;
}

const std::set<FeatureId>& FeatureRegistry::of(FeatureKind kind) const {
  switch (kind) {
    case FeatureKind::kRoDense:
      return ro_dense_;
    case FeatureKind::kRoIdList:
      return ro_idlist_;
    case FeatureKind::kNroDense:
      return nro_dense_;
    case FeatureKind::kNroIdList:
      break;
  }
  return nro_idlist_;
}

bool FeatureRegistry::operator==(const FeatureRegistry& other) const {
  return kinds_ == other.kinds_;
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << "request " << request_id << ": " << field << ": " << message;
  return os.str();
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out = "invalid sample";
  for (const auto& v : violations) {
    out += "; ";
    out += v.describe();
  }
  return out;
}

bool sorted_unique(const std::vector<LabelId>& labels) {
  return std::adjacent_find(labels.begin(), labels.end(),
                            [](LabelId a, LabelId b) { return a >= b; }) ==
         labels.end();
}

class Checker {
 public:
  Checker(RequestId request_id, const FeatureRegistry* registry,
          std::vector<Violation>& out)
      : request_id_(request_id), registry_(registry), out_(out) {}

  void fail(std::string field, std::string message) {
    out_.push_back({request_id_, std::move(field), std::move(message)});
  }

  // Checks that `id` belongs to one of the allowed groups.
  void expect_kind(const std::string& field, FeatureId id,
                   std::initializer_list<FeatureKind> allowed) {
    if (registry_ == nullptr) return;
    auto kind = registry_->kind_of(id);
    if (!kind) {
      fail(field, "feature " + std::to_string(id) + " is not registered");
      return;
    }
    if (std::find(allowed.begin(), allowed.end(), *kind) == allowed.end()) {
      fail(field, "feature " + std::to_string(id) + " is registered as " +
                      to_string(*kind));
    }
  }

 private:
  RequestId request_id_;
  const FeatureRegistry* registry_;
  std::vector<Violation>& out_;
};

std::vector<Violation> validate_impl(const RequestSample& s,
                                     const FeatureRegistry* registry) {
  std::vector<Violation> out;
  Checker check(s.request_id, registry, out);
  const std::size_t k = s.items.size();

  if (k == 0) check.fail("items", "request has no items");
  std::unordered_set<ItemId> seen;
  for (ItemId item : s.items) {
    if (!seen.insert(item).second) {
      check.fail("items", "duplicate item " + std::to_string(item));
    }
  }
  if (s.conversions.size() != k) {
    check.fail("conversions", "length " + std::to_string(s.conversions.size()) +
                                  " != items length " + std::to_string(k));
  }
  for (std::size_t i = 0; i < s.conversions.size(); ++i) {
    if (!sorted_unique(s.conversions[i])) {
      check.fail("conversions",
                 "labels at index " + std::to_string(i) +
                     " are not strictly ascending");
    }
  }
  for (const auto& [id, _] : s.ro_dense) {
    check.expect_kind("ro_dense", id, {FeatureKind::kRoDense});
  }
  for (const auto& [id, _] : s.ro_idlist) {
    check.expect_kind("ro_idlist", id, {FeatureKind::kRoIdList});
  }
  for (const auto& [id, values] : s.nro_dense) {
    check.expect_kind("nro_dense", id, {FeatureKind::kNroDense});
    if (values.size() != k) {
      check.fail("nro_dense", "feature " + std::to_string(id) + " has length " +
                                  std::to_string(values.size()) +
                                  " != items length " + std::to_string(k));
    }
  }
  for (const auto& [id, lists] : s.nro_idlist) {
    check.expect_kind("nro_idlist", id, {FeatureKind::kNroIdList});
    if (lists.size() != k) {
      check.fail("nro_idlist", "feature " + std::to_string(id) +
                                   " has length " +
                                   std::to_string(lists.size()) +
                                   " != items length " + std::to_string(k));
    }
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

std::vector<Violation> validate_request_sample(const RequestSample& sample,
                                               const FeatureRegistry& registry) {
  return validate_impl(sample, &registry);
}

std::vector<Violation> validate_request_sample(const RequestSample& sample) {
  return validate_impl(sample, nullptr);
}

std::vector<Violation> validate_impression_sample(
    const ImpressionSample& s, const FeatureRegistry& registry) {
  std::vector<Violation> out;
  Checker check(s.request_id, &registry, out);
  if (!sorted_unique(s.conversions)) {
    check.fail("conversions", "labels are not strictly ascending");
  }
  for (const auto& [id, _] : s.dense_features) {
    check.expect_kind("dense_features", id,
                      {FeatureKind::kRoDense, FeatureKind::kNroDense});
  }
  for (const auto& [id, _] : s.idlist_features) {
    check.expect_kind("idlist_features", id,
                      {FeatureKind::kRoIdList, FeatureKind::kNroIdList});
  }
  for (const auto& [id, _] : s.idscorelist_features) {
    if (!registry.contains(id)) {
      check.fail("idscorelist_features",
                 "feature " + std::to_string(id) + " is not registered");
    }
  }
  return out;
}

namespace {

std::vector<ImpressionSample> expand_unchecked(const RequestSample& s) {
  std::vector<ImpressionSample> out(s.items.size());
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    ImpressionSample& imp = out[i];
    imp.request_id = s.request_id;
    imp.user_id = s.user_id;
    imp.item_id = s.items[i];
    imp.conversions = s.conversions[i];
    imp.dense_features = s.ro_dense;
    imp.idlist_features = s.ro_idlist;
    for (const auto& [id, values] : s.nro_dense) {
      imp.dense_features.emplace(id, values[i]);
    }
    for (const auto& [id, lists] : s.nro_idlist) {
      imp.idlist_features.emplace(id, lists[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<ImpressionSample> expand_request_sample(const RequestSample& s) {
  if (auto v = validate_impl(s, nullptr); !v.empty()) {
    throw ValidationError(std::move(v));
  }
  return expand_unchecked(s);
}

std::vector<ImpressionSample> expand_request_sample(
    const RequestSample& s, const FeatureRegistry& registry) {
  if (auto v = validate_impl(s, &registry); !v.empty()) {
    throw ValidationError(std::move(v));
  }
  return expand_unchecked(s);
}

std::vector<RequestSample> group_impressions(
    const std::vector<ImpressionSample>& impressions,
    const FeatureRegistry& registry) {
  std::vector<RequestSample> out;
  std::unordered_map<RequestId, std::size_t> index;

  for (const ImpressionSample& imp : impressions) {
    DenseMap ro_dense;
    IdListMap ro_idlist;
    for (const auto& [id, v] : imp.dense_features) {
      if (registry.kind_of(id) == FeatureKind::kRoDense) ro_dense.emplace(id, v);
    }
    for (const auto& [id, v] : imp.idlist_features) {
      if (registry.kind_of(id) == FeatureKind::kRoIdList) {
        ro_idlist.emplace(id, v);
      }
    }

    auto [it, fresh] = index.try_emplace(imp.request_id, out.size());
    if (fresh) {
      RequestSample s;
      s.request_id = imp.request_id;
      s.user_id = imp.user_id;
      s.ro_dense = std::move(ro_dense);
      s.ro_idlist = std::move(ro_idlist);
      out.push_back(std::move(s));
    } else {
      const RequestSample& s = out[it->second];
      if (s.user_id != imp.user_id || s.ro_dense != ro_dense ||
          s.ro_idlist != ro_idlist) {
        throw ValidationError({{imp.request_id, "ro_features",
                                "impression " + std::to_string(imp.item_id) +
                                    " disagrees with its request's "
                                    "request-only features"}});
      }
    }

    RequestSample& s = out[it->second];
    const std::size_t slot = s.items.size();
    s.items.push_back(imp.item_id);
    s.conversions.push_back(imp.conversions);
    for (const auto& [id, v] : imp.dense_features) {
      if (registry.kind_of(id) != FeatureKind::kNroDense) continue;
      auto& column = s.nro_dense[id];
      if (column.size() != slot) {
        throw ValidationError({{imp.request_id, "nro_dense",
                                "feature " + std::to_string(id) +
                                    " missing on some impressions"}});
      }
      column.push_back(v);
    }
    for (const auto& [id, v] : imp.idlist_features) {
      if (registry.kind_of(id) != FeatureKind::kNroIdList) continue;
      auto& column = s.nro_idlist[id];
      if (column.size() != slot) {
        throw ValidationError({{imp.request_id, "nro_idlist",
                                "feature " + std::to_string(id) +
                                    " missing on some impressions"}});
      }
      column.push_back(v);
    }
  }

  for (const RequestSample& s : out) {
    if (auto v = validate_impl(s, &registry); !v.empty()) {
      throw ValidationError(std::move(v));
    }
  }
  return out;
}

}  // namespace roo
