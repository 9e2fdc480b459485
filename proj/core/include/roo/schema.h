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

#ifndef ROO_SCHEMA_H_
#define ROO_SCHEMA_H_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace roo {

using FeatureId = std::uint64_t;
using LabelId = std::uint32_t;
using ItemId = std::uint64_t;
using RequestId = std::uint64_t;
using UserId = std::uint64_t;

using DenseMap = std::map<FeatureId, float>;
using IdListMap = std::map<FeatureId, std::vector<std::uint64_t>>;
using IdScoreListMap = std::map<FeatureId, std::map<std::uint64_t, float>>;

enum class FeatureKind { kRoDense, kRoIdList, kNroDense, kNroIdList };

const char* to_string(FeatureKind kind);
bool is_request_only(FeatureKind kind);

// Per-feature preprocessing metadata. Dense features use the normalization
// fields, id-list features the embedding and sequence fields.
struct FeatureMeta {
  std::uint32_t embedding_dim = 0;
  float norm_mean = 0.0f;
  float norm_std = 1.0f;
  float clamp_lo = -std::numeric_limits<float>::infinity();
  float clamp_hi = std::numeric_limits<float>::infinity();
  std::uint32_t max_seq_len = 0;  // 0: untruncated
};

// Partition of feature ids into the request-only (user side) and
// non-request-only (item side) dense and id-list groups.
class FeatureRegistry {
 public:
  // Throws std::invalid_argument if `id` is already registered in any group.
  void add(FeatureKind kind, FeatureId id, FeatureMeta meta = {});

  std::optional<FeatureKind> kind_of(FeatureId id) const;
  const FeatureMeta& meta(FeatureId id) const;
  bool contains(FeatureId id) const { return kinds_.count(id) != 0; }

  const std::set<FeatureId>& ro_dense() const { return ro_dense_; }
  const std::set<FeatureId>& ro_idlist() const { return ro_idlist_; }
  const std::set<FeatureId>& nro_dense() const { return nro_dense_; }
  const std::set<FeatureId>& nro_idlist() const { return nro_idlist_; }
  const std::set<FeatureId>& of(FeatureKind kind) const;

  bool operator==(const FeatureRegistry& other) const;

 private:
  std::set<FeatureId> ro_dense_;
  std::set<FeatureId> ro_idlist_;
  std::set<FeatureId> nro_dense_;
  std::set<FeatureId> nro_idlist_;
  std::map<FeatureId, FeatureKind> kinds_;
  std::map<FeatureId, FeatureMeta> meta_;
};

// One impression-level training example.
struct ImpressionSample {
  RequestId request_id = 0;
  UserId user_id = 0;
  ItemId item_id = 0;
  std::vector<LabelId> conversions;
  DenseMap dense_features;
  IdListMap idlist_features;
  IdScoreListMap idscorelist_features;

  bool operator==(const ImpressionSample&) const = default;
};

// One request-level training example: a single copy of the request-only
// features plus item-aligned arrays for everything per impression.
struct RequestSample {
  RequestId request_id = 0;
  UserId user_id = 0;
  std::vector<ItemId> items;
  std::vector<std::vector<LabelId>> conversions;
  DenseMap ro_dense;
  IdListMap ro_idlist;
  std::map<FeatureId, std::vector<float>> nro_dense;
  std::map<FeatureId, std::vector<std::vector<std::uint64_t>>> nro_idlist;

  std::size_t num_items() const { return items.size(); }
  bool operator==(const RequestSample&) const = default;
};

struct Violation {
  RequestId request_id = 0;
  std::string field;
  std::string message;

  std::string describe() const;
  bool operator==(const Violation&) const = default;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

std::vector<Violation> validate_request_sample(const RequestSample& sample,
                                               const FeatureRegistry& registry);
// Structural checks only (alignment, duplicates, label order).
std::vector<Violation> validate_request_sample(const RequestSample& sample);
std::vector<Violation> validate_impression_sample(
    const ImpressionSample& sample, const FeatureRegistry& registry);

// Expansion adapter: one ImpressionSample per item, request-only features
// copied into every output and item-side features sliced at the item index.
// Throws ValidationError when the sample is not aligned. Registry membership
// is only checked by the overload taking a registry.
std::vector<ImpressionSample> expand_request_sample(const RequestSample& sample);
std::vector<ImpressionSample> expand_request_sample(
    const RequestSample& sample, const FeatureRegistry& registry);

// Inverse of expansion. Impressions are grouped by request id in first-seen
// order and items keep their relative order. Throws ValidationError when the
// request-only features of one request disagree between impressions.
std::vector<RequestSample> group_impressions(
    const std::vector<ImpressionSample>& impressions,
    const FeatureRegistry& registry);

}  // namespace roo

#endif  // ROO_SCHEMA_H_
