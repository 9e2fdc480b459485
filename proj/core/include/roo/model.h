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

#ifndef ROO_MODEL_H_
#define ROO_MODEL_H_

// Forward-only reference kernels for request-level batches.
//
// Every kernel runs once per request-only (RO) row for user-side work and
// once per item-side (NRO) row for candidate work; results reach NRO rows
// through the batch's fanout index. Running the same kernels on an
// impression-level batch (every impression its own request) is the
// reference the request-level path must reproduce. All reductions
// accumulate in ascending index order, so both paths are bit-identical.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roo/batcher.h"
#include "roo/schema.h"
#include "roo/tensor.h"

namespace roo {

// Deterministic id -> vector table. Row 0 is the all-zero padding row; id
// maps to row id % num_rows. Other rows are uniform(-1/sqrt(dim), 1/sqrt(dim)).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::uint32_t num_rows, std::uint32_t dim, std::uint64_t seed);

  std::uint32_t num_rows() const { return num_rows_; }
  std::uint32_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const float> lookup(std::uint64_t id) const;
  const Matrix& weights() const { return weights_; }
  Matrix& mutable_weights() { return weights_; }

 private:
  std::uint32_t num_rows_ = 0;
  std::uint32_t dim_ = 0;
  std::uint64_t seed_ = 0;
  Matrix weights_;
};

// Linear Compress Embedding: compresses n_in stacked embeddings of width
// d_in to n_out, then projects each to d_out.
struct LceParams {
  std::uint32_t n_in = 0;
  std::uint32_t n_out = 0;
  std::uint32_t d_in = 0;
  std::uint32_t d_out = 0;
  Matrix w_compress;               // [n_in x n_out]
  std::vector<float> b_compress;   // [n_out]
  Matrix w_project;                // [d_in x d_out]
  std::vector<float> b_project;    // [d_out]
};

// One causal self-attention layer plus a d -> 4d -> d feed-forward block,
// both with residual connections.
struct SeqEncoderParams {
  std::uint32_t d = 0;
  Matrix wq, wk, wv, wo;  // [d x d]
  Matrix w1;              // [d x 4d]
  std::vector<float> b1;
  Matrix w2;  // [4d x d]
  std::vector<float> b2;
};

// relu(x w1 + b1) w2 + b2, optionally followed by relu.
struct Mlp2 {
  Matrix w1;
  std::vector<float> b1;
  Matrix w2;
  std::vector<float> b2;
  bool relu_output = false;
};

struct MultiTaskHead {
  std::vector<std::string> tasks;
  Matrix w;              // [hidden x tasks]
  std::vector<float> b;  // [tasks]
};

enum class SeqPooling { kLastValid, kMeanValid };

struct ModelConfig {
  std::uint64_t seed = 1234;
  std::uint32_t dim = 16;
  std::uint32_t feature_table_rows = 1024;
  std::uint32_t item_table_rows = 4096;
  std::uint32_t action_table_rows = 16;
  std::uint32_t context_table_rows = 64;
  // Request-only id-list features forming the user history sequence. The
  // action and context lists are position-aligned with the item list.
  std::optional<FeatureId> history_items;
  std::optional<FeatureId> history_actions;
  std::optional<FeatureId> history_contexts;
  std::uint32_t n_max = 32;
  SeqPooling pooling = SeqPooling::kLastValid;
  std::uint32_t lce_n_out = 2;
  std::uint32_t lce_d_out = 8;
  std::uint32_t hidden = 32;
  std::vector<std::string> tasks = {"engagement", "consumption"};
};

struct ModelParams {
  ModelConfig config;
  FeatureRegistry registry;
  // Per id-list feature tables, excluding the history features which share
  // the item/action/context tables.
  std::map<FeatureId, EmbeddingTable> feature_tables;
  EmbeddingTable item_table;
  EmbeddingTable action_table;
  EmbeddingTable context_table;
  Matrix ro_dense_proj;  // [n_ro_dense x dim], empty when no RO dense
  std::vector<float> ro_dense_bias;
  LceParams lce;
  Matrix user_proj;  // [n_out * d_out x dim]
  std::vector<float> user_bias;
  Mlp2 item_tower;
  SeqEncoderParams seq;
  Mlp2 interaction;
  MultiTaskHead head;

  // Request-only id-list features pooled into the user arch, ascending.
  std::vector<FeatureId> user_arch_features() const;
  // Item-side id-list features pooled per candidate, ascending.
  std::vector<FeatureId> item_features() const;
  bool has_history() const { return config.history_items.has_value(); }
};

// Every parameter is derived from config.seed. Throws std::invalid_argument
// when the configuration does not fit the registry.
ModelParams init_params(const ModelConfig& config, const FeatureRegistry& registry);

// Work counters. FLOPs count a multiply-add as 2.
struct ForwardCounters {
  std::uint64_t b_ro = 0;
  std::uint64_t b_nro = 0;
  std::uint64_t ro_flops = 0;
  std::uint64_t nro_flops = 0;
  std::map<FeatureId, std::uint64_t> rows_fetched;
  std::map<FeatureId, std::uint64_t> bytes_moved;  // rows * dim * 4
  std::uint64_t target_item_rows = 0;
  std::uint64_t empty_history_rows = 0;

  void merge(const ForwardCounters& other);
  void fetched(FeatureId feature, std::uint64_t rows, std::uint32_t dim);
  bool operator==(const ForwardCounters&) const = default;
};

// Sum-pooled embeddings of one keyed feature, one row per jagged row.
Matrix pooled_lookup(const EmbeddingTable& table, const KeyedJagged& jagged,
                     FeatureId feature, ForwardCounters* counters);

// Pooled embeddings of a request-only id-list feature, one row per RO row.
// Throws std::invalid_argument when `feature` is not registered RO.
Matrix lookup_ro(const ModelParams& params, const JaggedBatch& batch,
                 FeatureId feature, ForwardCounters* counters);

// X: [B x d_in x n_in] -> b + g(X) W reshaped to [B x d_in x n_out], where
// g flattens X to [B*d_in x n_in].
Tensor3 lce_compress(const Tensor3& x, const LceParams& p,
                     ForwardCounters* counters = nullptr);
// Y: [B x d_in x n_out] -> b' + g'(Y) W' as [B x n_out x d_out], where g'
// permutes Y to [B*n_out x d_in].
Tensor3 lce_project(const Tensor3& y, const LceParams& p,
                    ForwardCounters* counters = nullptr);

// Stacks every user-arch feature embedding (and the RO dense projection)
// into X: [b_ro x dim x n_in].
Tensor3 stack_ro_embeddings(const ModelParams& params, const JaggedBatch& batch,
                            ForwardCounters* counters);
Tensor3 user_arch_forward(const Tensor3& x, const LceParams& p,
                          ForwardCounters* counters = nullptr);

// Token embeddings for the user history: one left-padded sequence of
// n_max tokens per RO row, mask 1 on real positions.
struct SequenceBatch {
  Tensor3 tokens;                  // [rows x n x d]
  std::vector<std::uint8_t> mask;  // [rows x n]

  std::size_t rows() const { return tokens.dim0(); }
  std::size_t length() const { return tokens.dim1(); }
  bool valid(std::size_t r, std::size_t p) const {
    return mask[r * length() + p] != 0;
  }
};

SequenceBatch build_history(const ModelParams& params, const JaggedBatch& batch,
                            ForwardCounters* counters);

// Numerically stable softmax (max subtracted, summed in index order).
std::vector<float> softmax(std::span<const float> scores);

// Causal self-attention over each history; returns the user representation
// per row (last valid position, or mean over valid positions). All-padding
// rows yield zeros and bump counters->empty_history_rows.
Matrix seq_encode_retrieval(const SequenceBatch& history,
                            const SeqEncoderParams& p, SeqPooling pooling,
                            ForwardCounters* counters = nullptr);

// Each target attends to its row's valid history and to itself, never to
// sibling targets. targets: [b_nro x d], aligned to impressions_per_sample.
// Throws std::invalid_argument on a row with zero targets.
Matrix seq_encode_ranking(const SequenceBatch& history, const Matrix& targets,
                          std::span<const std::uint32_t> impressions_per_sample,
                          const SeqEncoderParams& p,
                          ForwardCounters* counters = nullptr);

Matrix mlp2_forward(const Mlp2& mlp, const Matrix& x, std::uint64_t* flops);

// Item tower output per NRO row: [b_nro x dim].
Matrix item_tower_forward(const ModelParams& params, const JaggedBatch& batch,
                          ForwardCounters* counters);

enum class UserTower { kUserArch, kSequence };

std::vector<float> two_tower_forward(const ModelParams& params,
                                     const JaggedBatch& batch, UserTower tower,
                                     ForwardCounters* counters);

// Late-stage ranking logits: [b_nro x tasks].
Matrix lsr_forward(const ModelParams& params, const JaggedBatch& batch,
                   ForwardCounters* counters);

enum class Architecture { kTwoTower, kRetrieval, kRankingEncoder, kLsr };

const char* to_string(Architecture arch);
std::optional<Architecture> parse_architecture(std::string_view name);

struct ForwardOutput {
  Matrix values;  // [b_nro x width], sample-major then item order
  ForwardCounters counters;
};

ForwardOutput run_forward(const ModelParams& params, const JaggedBatch& batch,
                          Architecture arch);

// Builds the impression-level batch of the expanded samples and runs the
// same kernels with request-only features duplicated per impression.
ForwardOutput expanded_forward_oracle(const std::vector<RequestSample>& samples,
                                      const ModelParams& params,
                                      const BatchConfig& batch_config,
                                      Architecture arch);

// max |a - b| / max(|a|, |b|) over all elements (0 where both are 0).
double max_relative_difference(const Matrix& a, const Matrix& b);

}  // namespace roo

#endif  // ROO_MODEL_H_
