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

#include "roo/batcher.h"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <unordered_set>

namespace roo {

std::size_t KeyedJagged::key_index(FeatureId id) const {
  auto it = std::find(keys.begin(), keys.end(), id);
  if (it == keys.end()) {
    throw std::out_of_range("feature " + std::to_string(id) +
                            " is not a key of this jagged batch");
  }
  return static_cast<std::size_t>(it - keys.begin());
}

std::span<const std::uint64_t> KeyedJagged::row(std::size_t key,
                                                std::size_t r) const {
  const auto& off = offsets[key];
  return {values[key].data() + off[r], off[r + 1] - off[r]};
}

void KeyedJagged::push_row(std::size_t key, std::span<const std::uint64_t> ids) {
  lengths[key].push_back(static_cast<std::uint32_t>(ids.size()));
  values[key].insert(values[key].end(), ids.begin(), ids.end());
  offsets[key].push_back(values[key].size());
}

KeyedJagged make_keyed_jagged(std::vector<FeatureId> keys) {
  KeyedJagged kj;
  kj.lengths.resize(keys.size());
  kj.values.resize(keys.size());
  kj.offsets.assign(keys.size(), std::vector<std::size_t>{0});
  kj.keys = std::move(keys);
  return kj;
}

namespace {

std::vector<FeatureId> ids_of(const std::set<FeatureId>& s) {
  return {s.begin(), s.end()};
}

[[noreturn]] void missing(RequestId request, FeatureId id) {
  throw std::invalid_argument("registry mismatch: request " +
                              std::to_string(request) +
                              " lacks registered feature " + std::to_string(id));
}

float task_value(const TaskSpec& task, const std::vector<LabelId>& labels) {
  float v = 0.0f;
  for (LabelId l : labels) {
    if (auto it = task.label_values.find(l); it != task.label_values.end()) {
      v = std::max(v, it->second);
    }
  }
  return v;
}

JaggedBatch empty_batch(const FeatureRegistry& registry,
                        const BatchConfig& config) {
  JaggedBatch b;
  b.ro_dense_keys = ids_of(registry.ro_dense());
  b.nro_dense_keys = ids_of(registry.nro_dense());
  b.ro_idlist = make_keyed_jagged(ids_of(registry.ro_idlist()));
  b.nro_idlist = make_keyed_jagged(ids_of(registry.nro_idlist()));
  b.labels.resize(config.tasks.size());
  return b;
}

}  // namespace

JaggedBatch build_batch(const std::vector<RequestSample>& samples,
                        const FeatureRegistry& registry,
                        const BatchConfig& config) {
  if (samples.empty()) throw std::invalid_argument("build_batch: empty sample list");
  for (const RequestSample& s : samples) {
    if (auto v = validate_request_sample(s, registry); !v.empty()) {
      throw ValidationError(std::move(v));
    }
  }

  JaggedBatch b = empty_batch(registry, config);
  std::size_t b_nro = 0;
  for (const RequestSample& s : samples) b_nro += s.items.size();
  b.b_ro = static_cast<std::uint32_t>(samples.size());
  b.b_nro = static_cast<std::uint32_t>(b_nro);
  b.ro_dense = Matrix(samples.size(), b.ro_dense_keys.size());
  b.nro_dense = Matrix(b_nro, b.nro_dense_keys.size());
  for (auto& l : b.labels) l.reserve(b_nro);

  std::size_t nro_row = 0;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const RequestSample& s = samples[r];
    b.request_ids.push_back(s.request_id);
    b.user_ids.push_back(s.user_id);
    b.impressions_per_sample.push_back(static_cast<std::uint32_t>(s.items.size()));

    for (std::size_t c = 0; c < b.ro_dense_keys.size(); ++c) {
      auto it = s.ro_dense.find(b.ro_dense_keys[c]);
      if (it == s.ro_dense.end()) missing(s.request_id, b.ro_dense_keys[c]);
      b.ro_dense(r, c) = it->second;
    }
    for (std::size_t k = 0; k < b.ro_idlist.keys.size(); ++k) {
      auto it = s.ro_idlist.find(b.ro_idlist.keys[k]);
      if (it == s.ro_idlist.end()) missing(s.request_id, b.ro_idlist.keys[k]);
      b.ro_idlist.push_row(k, it->second);
    }

    std::vector<const std::vector<float>*> dense_cols;
    for (FeatureId id : b.nro_dense_keys) {
      auto it = s.nro_dense.find(id);
      if (it == s.nro_dense.end()) missing(s.request_id, id);
      dense_cols.push_back(&it->second);
    }
    std::vector<const std::vector<std::vector<std::uint64_t>>*> list_cols;
    for (FeatureId id : b.nro_idlist.keys) {
      auto it = s.nro_idlist.find(id);
      if (it == s.nro_idlist.end()) missing(s.request_id, id);
      list_cols.push_back(&it->second);
    }

    for (std::size_t i = 0; i < s.items.size(); ++i, ++nro_row) {
      b.items.push_back(s.items[i]);
      for (std::size_t c = 0; c < dense_cols.size(); ++c) {
        b.nro_dense(nro_row, c) = (*dense_cols[c])[i];
      }
      for (std::size_t k = 0; k < list_cols.size(); ++k) {
        b.nro_idlist.push_row(k, (*list_cols[k])[i]);
      }
      for (std::size_t t = 0; t < config.tasks.size(); ++t) {
        b.labels[t].push_back(task_value(config.tasks[t], s.conversions[i]));
      }
    }
  }
  return b;
}

JaggedBatch build_impression_batch(const std::vector<ImpressionSample>& samples,
                                   const FeatureRegistry& registry,
                                   const BatchConfig& config) {
  if (samples.empty()) {
    throw std::invalid_argument("build_impression_batch: empty sample list");
  }
  for (const ImpressionSample& s : samples) {
    if (auto v = validate_impression_sample(s, registry); !v.empty()) {
      throw ValidationError(std::move(v));
    }
  }

  JaggedBatch b = empty_batch(registry, config);
  const std::size_t n = samples.size();
  b.b_ro = static_cast<std::uint32_t>(n);
  b.b_nro = static_cast<std::uint32_t>(n);
  b.ro_dense = Matrix(n, b.ro_dense_keys.size());
  b.nro_dense = Matrix(n, b.nro_dense_keys.size());

  auto dense_at = [](const ImpressionSample& s, FeatureId id) {
    auto it = s.dense_features.find(id);
    if (it == s.dense_features.end()) missing(s.request_id, id);
    return it->second;
  };
  auto list_at = [](const ImpressionSample& s,
                    FeatureId id) -> const std::vector<std::uint64_t>& {
    auto it = s.idlist_features.find(id);
    if (it == s.idlist_features.end()) missing(s.request_id, id);
    return it->second;
  };

  for (std::size_t r = 0; r < n; ++r) {
    const ImpressionSample& s = samples[r];
    b.request_ids.push_back(s.request_id);
    b.user_ids.push_back(s.user_id);
    b.items.push_back(s.item_id);
    b.impressions_per_sample.push_back(1);
    for (std::size_t c = 0; c < b.ro_dense_keys.size(); ++c) {
      b.ro_dense(r, c) = dense_at(s, b.ro_dense_keys[c]);
    }
    for (std::size_t c = 0; c < b.nro_dense_keys.size(); ++c) {
      b.nro_dense(r, c) = dense_at(s, b.nro_dense_keys[c]);
    }
    for (std::size_t k = 0; k < b.ro_idlist.keys.size(); ++k) {
      b.ro_idlist.push_row(k, list_at(s, b.ro_idlist.keys[k]));
    }
    for (std::size_t k = 0; k < b.nro_idlist.keys.size(); ++k) {
      b.nro_idlist.push_row(k, list_at(s, b.nro_idlist.keys[k]));
    }
    for (std::size_t t = 0; t < config.tasks.size(); ++t) {
      b.labels[t].push_back(task_value(config.tasks[t], s.conversions));
    }
  }
  return b;
}

void check_batch(const JaggedBatch& b) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid batch: " + what);
  };
  if (b.impressions_per_sample.size() != b.b_ro) fail("impressions_per_sample length");
  std::uint64_t total = 0;
  for (std::uint32_t k : b.impressions_per_sample) {
    if (k == 0) fail("a sample has zero impressions");
    total += k;
  }
  if (total != b.b_nro) fail("sum(impressions_per_sample) != b_nro");
  if (b.ro_dense.rows() != b.b_ro || b.ro_dense.cols() != b.ro_dense_keys.size()) {
    fail("ro_dense shape");
  }
  if (b.nro_dense.rows() != b.b_nro ||
      b.nro_dense.cols() != b.nro_dense_keys.size()) {
    fail("nro_dense shape");
  }
  if (b.items.size() != b.b_nro) fail("items length");
  if (b.request_ids.size() != b.b_ro) fail("request_ids length");
  auto check_jagged = [&](const KeyedJagged& kj, std::size_t rows,
                          const char* name) {
    for (std::size_t k = 0; k < kj.keys.size(); ++k) {
      if (kj.lengths[k].size() != rows) fail(std::string(name) + " row count");
      std::uint64_t sum = std::accumulate(kj.lengths[k].begin(),
                                          kj.lengths[k].end(), std::uint64_t{0});
      if (sum != kj.values[k].size()) fail(std::string(name) + " lengths/values");
    }
  };
  check_jagged(b.ro_idlist, b.b_ro, "ro_idlist");
  check_jagged(b.nro_idlist, b.b_nro, "nro_idlist");
  for (const auto& l : b.labels) {
    if (l.size() != b.b_nro) fail("label length");
  }
}

FanoutIndex fanout(const JaggedBatch& batch) {
  FanoutIndex f;
  f.row_map.reserve(batch.b_nro);
  for (std::uint32_t r = 0; r < batch.impressions_per_sample.size(); ++r) {
    f.row_map.insert(f.row_map.end(), batch.impressions_per_sample[r], r);
  }
  return f;
}

std::vector<std::uint64_t> merge_sequences(
    const IdListMap& features, std::span<const FeatureId> order,
    const std::map<FeatureId, std::vector<std::int64_t>>* timestamps) {
  std::vector<std::uint64_t> ids;
  std::vector<std::int64_t> times;
  for (FeatureId id : order) {
    auto it = features.find(id);
    if (it == features.end()) {
      throw std::invalid_argument("merge_sequences: unknown feature " +
                                  std::to_string(id));
    }
    ids.insert(ids.end(), it->second.begin(), it->second.end());
    if (timestamps != nullptr) {
      auto t = timestamps->find(id);
      if (t == timestamps->end() || t->second.size() != it->second.size()) {
        throw std::invalid_argument(
            "merge_sequences: timestamps do not cover feature " +
            std::to_string(id));
      }
      times.insert(times.end(), t->second.begin(), t->second.end());
    }
  }
  if (timestamps == nullptr) return ids;

  std::vector<std::size_t> perm(ids.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<std::uint64_t> merged;
  merged.reserve(ids.size());
  for (std::size_t i : perm) merged.push_back(ids[i]);
  return merged;
}

std::vector<std::vector<std::uint64_t>> merge_sequences(
    const KeyedJagged& jagged, std::span<const FeatureId> order) {
  std::vector<std::size_t> keys;
  for (FeatureId id : order) {
    auto it = std::find(jagged.keys.begin(), jagged.keys.end(), id);
    if (it == jagged.keys.end()) {
      throw std::invalid_argument("merge_sequences: unknown feature " +
                                  std::to_string(id));
    }
    keys.push_back(static_cast<std::size_t>(it - jagged.keys.begin()));
  }
  std::vector<std::vector<std::uint64_t>> out(jagged.rows());
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t k : keys) {
      auto ids = jagged.row(k, r);
      out[r].insert(out[r].end(), ids.begin(), ids.end());
    }
  }
  return out;
}

std::vector<std::uint64_t> dedup_ids(std::span<const std::uint64_t> seq,
                                     DedupKeep keep) {
  std::vector<std::uint64_t> out;
  std::unordered_set<std::uint64_t> seen;
  if (keep == DedupKeep::kFirst) {
    for (auto id : seq) {
      if (seen.insert(id).second) out.push_back(id);
    }
    return out;
  }
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    if (seen.insert(*it).second) out.push_back(*it);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

NormParams norm_params(const FeatureMeta& meta) {
  return {meta.norm_mean, meta.norm_std, meta.clamp_lo, meta.clamp_hi};
}

Matrix normalize_dense(const Matrix& m, std::span<const NormParams> params) {
  if (params.size() != m.cols()) {
    throw std::invalid_argument("normalize_dense: " +
                                std::to_string(params.size()) +
                                " params for " + std::to_string(m.cols()) +
                                " columns");
  }
  for (std::size_t c = 0; c < params.size(); ++c) {
    if (!(params[c].std > 0.0f)) {
      throw std::invalid_argument("normalize_dense: std <= 0 for column " +
                                  std::to_string(c));
    }
  }
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const NormParams& p = params[c];
      out(r, c) = (std::clamp(m(r, c), p.lo, p.hi) - p.mean) / p.std;
    }
  }
  return out;
}

MaskedSequence truncate_and_mask(std::span<const std::uint64_t> seq,
                                 std::size_t n_max) {
  if (n_max == 0) throw std::invalid_argument("truncate_and_mask: n_max must be >= 1");
  MaskedSequence out;
  const std::size_t keep = std::min(seq.size(), n_max);
  const std::size_t pad = n_max - keep;
  out.ids.assign(pad, kPaddingId);
  out.mask.assign(pad, 0);
  out.ids.insert(out.ids.end(), seq.end() - static_cast<std::ptrdiff_t>(keep),
                 seq.end());
  out.mask.insert(out.mask.end(), keep, 1);
  return out;
}

namespace {

nlohmann::json jagged_to_json(const KeyedJagged& kj) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < kj.keys.size(); ++k) {
    j[std::to_string(kj.keys[k])] = {{"lengths", kj.lengths[k]},
                                     {"values", kj.values[k]}};
  }
  return j;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<float>(row.begin(), row.end()));
  }
  return rows;
}

}  // namespace

std::string batch_to_json(const JaggedBatch& b) {
  nlohmann::ordered_json j;
  j["b_ro"] = b.b_ro;
  j["b_nro"] = b.b_nro;
  j["impressions_per_sample"] = b.impressions_per_sample;
  j["request_ids"] = b.request_ids;
  j["user_ids"] = b.user_ids;
  j["items"] = b.items;
  j["ro_dense_keys"] = b.ro_dense_keys;
  j["ro_dense"] = matrix_to_json(b.ro_dense);
  j["ro_idlist"] = jagged_to_json(b.ro_idlist);
  j["nro_dense_keys"] = b.nro_dense_keys;
  j["nro_dense"] = matrix_to_json(b.nro_dense);
  j["nro_idlist"] = jagged_to_json(b.nro_idlist);
  j["labels"] = b.labels;
  j["row_map"] = fanout(b).row_map;
  return j.dump();
}

}  // namespace roo
