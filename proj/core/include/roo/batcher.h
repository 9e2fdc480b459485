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

#ifndef ROO_BATCHER_H_
#define ROO_BATCHER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roo/schema.h"
#include "roo/tensor.h"

namespace roo {

// Jagged id lists for several features over the same logical rows.
struct KeyedJagged {
  std::vector<FeatureId> keys;
  std::vector<std::vector<std::uint32_t>> lengths;  // [key][row]
  std::vector<std::vector<std::uint64_t>> values;   // [key][flat]
  std::vector<std::vector<std::size_t>> offsets;    // [key][row + 1]

  std::size_t rows() const { return lengths.empty() ? 0 : lengths[0].size(); }
  // Index of `id` in keys; throws std::out_of_range when absent.
  std::size_t key_index(FeatureId id) const;
  std::span<const std::uint64_t> row(std::size_t key, std::size_t r) const;
  void push_row(std::size_t key, std::span<const std::uint64_t> ids);

  bool operator==(const KeyedJagged&) const = default;
};

KeyedJagged make_keyed_jagged(std::vector<FeatureId> keys);

// A label task; the task value of an impression is the largest value among
// its labels listed here, 0 when none is present. Binary tasks map their
// label to 1.0, duration-style tasks map bucket labels to durations.
struct TaskSpec {
  std::string name;
  std::map<LabelId, float> label_values;
};

struct BatchConfig {
  std::vector<TaskSpec> tasks;
};

struct JaggedBatch {
  std::uint32_t b_ro = 0;
  std::uint32_t b_nro = 0;
  std::vector<std::uint32_t> impressions_per_sample;  // length b_ro
  std::vector<RequestId> request_ids;                 // length b_ro
  std::vector<UserId> user_ids;                       // length b_ro
  std::vector<ItemId> items;                          // length b_nro
  std::vector<FeatureId> ro_dense_keys;
  Matrix ro_dense;  // [b_ro x ro_dense_keys]
  KeyedJagged ro_idlist;
  std::vector<FeatureId> nro_dense_keys;
  Matrix nro_dense;  // [b_nro x nro_dense_keys]
  KeyedJagged nro_idlist;
  std::vector<std::vector<float>> labels;  // [task][b_nro]

  bool operator==(const JaggedBatch&) const = default;
};

struct FanoutIndex {
  std::vector<std::uint32_t> row_map;  // NRO row -> owning RO row
};

// Request-only features appear once per sample; item-side rows are laid out
// sample-major then item order. Throws std::invalid_argument on an empty
// list, and ValidationError / std::invalid_argument when a sample does not
// match the registry (unregistered feature, or a registered one missing).
JaggedBatch build_batch(const std::vector<RequestSample>& samples,
                        const FeatureRegistry& registry,
                        const BatchConfig& config);

// Impression-level batch: every row is its own request, so request-only
// features are duplicated per impression and b_ro == b_nro.
JaggedBatch build_impression_batch(const std::vector<ImpressionSample>& samples,
                                   const FeatureRegistry& registry,
                                   const BatchConfig& config);

FanoutIndex fanout(const JaggedBatch& batch);
// Throws std::invalid_argument when the batch's counts are inconsistent.
void check_batch(const JaggedBatch& batch);

// Concatenates the given features' ids in `order`, or by ascending
// timestamp (stable) when `timestamps` gives a time per id.
std::vector<std::uint64_t> merge_sequences(
    const IdListMap& features, std::span<const FeatureId> order,
    const std::map<FeatureId, std::vector<std::int64_t>>* timestamps = nullptr);
// Row-wise merge over a keyed jagged batch.
std::vector<std::vector<std::uint64_t>> merge_sequences(
    const KeyedJagged& jagged, std::span<const FeatureId> order);

enum class DedupKeep { kFirst, kLast };

std::vector<std::uint64_t> dedup_ids(std::span<const std::uint64_t> seq,
                                     DedupKeep keep = DedupKeep::kFirst);

struct NormParams {
  float mean = 0.0f;
  float std = 1.0f;
  float lo = -std::numeric_limits<float>::infinity();
  float hi = std::numeric_limits<float>::infinity();
};

NormParams norm_params(const FeatureMeta& meta);

// x' = (clamp(x, lo, hi) - mean) / std per column. Throws
// std::invalid_argument when a std is <= 0 or params do not cover columns.
Matrix normalize_dense(const Matrix& m, std::span<const NormParams> params);

inline constexpr std::uint64_t kPaddingId = 0;

struct MaskedSequence {
  std::vector<std::uint64_t> ids;  // length n_max, left-padded
  std::vector<std::uint8_t> mask;  // 1 on real positions
};

// Keeps the most recent n_max ids (the suffix), left-padded with kPaddingId.
MaskedSequence truncate_and_mask(std::span<const std::uint64_t> seq,
                                 std::size_t n_max);

// Debug dump used by golden tests and the `batch` subcommand.
std::string batch_to_json(const JaggedBatch& batch);

}  // namespace roo

#endif  // ROO_BATCHER_H_
