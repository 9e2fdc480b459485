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

#include "roo/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace roo {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

// Uniform floats from mt19937_64 bits; avoids the implementation-defined
// std::uniform_real_distribution so weights match across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  float next(float lo, float hi) {
    const float u = static_cast<float>(engine_() >> 40) * 0x1.0p-24f;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  UniformSource rng(seed);
  const float scale = 1.0f / std::sqrt(static_cast<float>(std::max<std::size_t>(rows, 1)));
  Matrix m(rows, cols);
  for (float& v : m.data()) v = rng.next(-scale, scale);
  return m;
}

std::vector<float> random_vector(std::size_t n, float scale, std::uint64_t seed) {
  UniformSource rng(seed);
  std::vector<float> v(n);
  for (float& x : v) x = rng.next(-scale, scale);
  return v;
}

enum Tag : std::uint64_t {
  kTagItem = 1,
  kTagAction,
  kTagContext,
  kTagRoDense,
  kTagRoDenseBias,
  kTagLceW,
  kTagLceB,
  kTagLceW2,
  kTagLceB2,
  kTagUserProj,
  kTagUserBias,
  kTagItemTower,
  kTagSeq,
  kTagInteraction,
  kTagHead,
  kTagFeatureBase = 1'000'000,
};

Mlp2 random_mlp(std::size_t in, std::size_t hidden, std::size_t out,
                bool relu_output, std::uint64_t seed) {
  Mlp2 m;
  m.w1 = random_matrix(in, hidden, derive_seed(seed, 1));
  m.b1 = random_vector(hidden, 0.1f, derive_seed(seed, 2));
  m.w2 = random_matrix(hidden, out, derive_seed(seed, 3));
  m.b2 = random_vector(out, 0.1f, derive_seed(seed, 4));
  m.relu_output = relu_output;
  return m;
}

float dot(std::span<const float> a, std::span<const float> b) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// out = x W (+ bias), accumulated in ascending k like matmul().
std::vector<float> vecmat(std::span<const float> x, const Matrix& w,
                          std::span<const float> bias = {}) {
  std::vector<float> out(w.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * w(k, j);
    out[j] = bias.empty() ? acc : acc + bias[j];
  }
  return out;
}

std::uint64_t matmul_flops(std::size_t rows, std::size_t inner, std::size_t cols) {
  return 2ULL * rows * inner * cols;
}

void add_flops(ForwardCounters* c, std::uint64_t ro, std::uint64_t nro) {
  if (c == nullptr) return;
  c->ro_flops += ro;
  c->nro_flops += nro;
}

Matrix flatten(const Tensor3& t) {
  return Matrix(t.dim0(), t.dim1() * t.dim2(), t.data());
}

// Post-attention part of the layer for one query token.
struct KeyValue {
  std::vector<float> key;
  std::vector<float> value;
};

KeyValue project_kv(std::span<const float> x, const SeqEncoderParams& p) {
  return {vecmat(x, p.wk), vecmat(x, p.wv)};
}

std::uint64_t kv_flops(std::uint32_t d) { return 2 * matmul_flops(1, d, d); }

// Output at a query token `x` whose attention set is `kv` (ascending
// position order, the query's own entry last when it attends to itself).
std::vector<float> encode_query(std::span<const float> x,
                                const std::vector<const KeyValue*>& kv,
                                const SeqEncoderParams& p, std::uint64_t* flops) {
  const std::uint32_t d = p.d;
  const float scale = 1.0f / std::sqrt(static_cast<float>(d));
  const std::vector<float> q = vecmat(x, p.wq);
  std::vector<float> scores(kv.size());
  for (std::size_t i = 0; i < kv.size(); ++i) {
    scores[i] = dot(q, kv[i]->key) * scale;
  }
  const std::vector<float> w = softmax(scores);
  std::vector<float> attended(d, 0.0f);
  for (std::size_t i = 0; i < kv.size(); ++i) {
    for (std::uint32_t c = 0; c < d; ++c) attended[c] += w[i] * kv[i]->value[c];
  }
  const std::vector<float> o = vecmat(attended, p.wo);
  std::vector<float> h(d);
  for (std::uint32_t c = 0; c < d; ++c) h[c] = x[c] + o[c];
  std::vector<float> f = vecmat(h, p.w1, p.b1);
  for (float& v : f) v = std::max(v, 0.0f);
  const std::vector<float> g = vecmat(f, p.w2, p.b2);
  for (std::uint32_t c = 0; c < d; ++c) h[c] += g[c];

  *flops += matmul_flops(1, d, d)              // query
            + 4ULL * d * kv.size()             // scores and weighted sum
            + matmul_flops(1, d, d)            // output projection
            + 2 * matmul_flops(1, d, 4ULL * d);  // feed-forward
  return h;
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("shape mismatch: " + what);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::uint32_t num_rows, std::uint32_t dim,
                               std::uint64_t seed)
    : num_rows_(num_rows), dim_(dim), seed_(seed), weights_(num_rows, dim) {
  if (num_rows == 0 || dim == 0) {
    throw std::invalid_argument("embedding table needs rows and dim > 0");
  }
  UniformSource rng(seed);
  const float bound = 1.0f / std::sqrt(static_cast<float>(dim));
  for (std::uint32_t r = 1; r < num_rows; ++r) {
    for (float& v : weights_.row(r)) v = rng.next(-bound, bound);
  }
}

std::span<const float> EmbeddingTable::lookup(std::uint64_t id) const {
  return weights_.row(static_cast<std::size_t>(id % num_rows_));
}

std::vector<FeatureId> ModelParams::user_arch_features() const {
  std::vector<FeatureId> out;
  for (FeatureId id : registry.ro_idlist()) {
    if (id == config.history_items || id == config.history_actions ||
        id == config.history_contexts) {
      continue;
    }
    out.push_back(id);
  }
  return out;
}

std::vector<FeatureId> ModelParams::item_features() const {
  return {registry.nro_idlist().begin(), registry.nro_idlist().end()};
}

ModelParams init_params(const ModelConfig& config,
                        const FeatureRegistry& registry) {
  if (config.dim == 0 || config.n_max == 0 || config.lce_n_out == 0 ||
      config.lce_d_out == 0 || config.hidden == 0 || config.tasks.empty()) {
    throw std::invalid_argument("model config dimensions must be >= 1");
  }
  for (const auto& f : {config.history_items, config.history_actions,
                        config.history_contexts}) {
    if (f && registry.kind_of(*f) != FeatureKind::kRoIdList) {
      throw std::invalid_argument("history feature " + std::to_string(*f) +
                                  " must be a registered RO id-list feature");
    }
  }
  if ((config.history_actions || config.history_contexts) &&
      !config.history_items) {
    throw std::invalid_argument("history actions/contexts need history items");
  }

  ModelParams p;
  p.config = config;
  p.registry = registry;
  const std::uint64_t seed = config.seed;
  const std::uint32_t d = config.dim;

  for (FeatureId id : p.user_arch_features()) {
    p.feature_tables.emplace(
        id, EmbeddingTable(config.feature_table_rows, d,
                           derive_seed(seed, kTagFeatureBase + id)));
  }
  for (FeatureId id : p.item_features()) {
    p.feature_tables.emplace(
        id, EmbeddingTable(config.feature_table_rows, d,
                           derive_seed(seed, kTagFeatureBase + id)));
  }
  p.item_table = EmbeddingTable(config.item_table_rows, d, derive_seed(seed, kTagItem));
  p.action_table =
      EmbeddingTable(config.action_table_rows, d, derive_seed(seed, kTagAction));
  p.context_table =
      EmbeddingTable(config.context_table_rows, d, derive_seed(seed, kTagContext));

  const std::size_t n_ro_dense = registry.ro_dense().size();
  if (n_ro_dense > 0) {
    p.ro_dense_proj = random_matrix(n_ro_dense, d, derive_seed(seed, kTagRoDense));
    p.ro_dense_bias = random_vector(d, 0.1f, derive_seed(seed, kTagRoDenseBias));
  }

  LceParams& lce = p.lce;
  lce.n_in = static_cast<std::uint32_t>(p.user_arch_features().size() +
                                        (n_ro_dense > 0 ? 1 : 0));
  lce.n_out = config.lce_n_out;
  lce.d_in = d;
  lce.d_out = config.lce_d_out;
  if (lce.n_in > 0) {
    lce.w_compress = random_matrix(lce.n_in, lce.n_out, derive_seed(seed, kTagLceW));
    lce.b_compress = random_vector(lce.n_out, 0.1f, derive_seed(seed, kTagLceB));
    lce.w_project = random_matrix(lce.d_in, lce.d_out, derive_seed(seed, kTagLceW2));
    lce.b_project = random_vector(lce.d_out, 0.1f, derive_seed(seed, kTagLceB2));
  }
  const std::size_t user_width = std::size_t{lce.n_out} * lce.d_out;
  p.user_proj = random_matrix(user_width, d, derive_seed(seed, kTagUserProj));
  p.user_bias = random_vector(d, 0.1f, derive_seed(seed, kTagUserBias));

  const std::size_t item_in =
      d + d * p.item_features().size() + registry.nro_dense().size();
  p.item_tower = random_mlp(item_in, config.hidden, d, false,
                            derive_seed(seed, kTagItemTower));

  SeqEncoderParams& s = p.seq;
  const std::uint64_t seq_seed = derive_seed(seed, kTagSeq);
  s.d = d;
  s.wq = random_matrix(d, d, derive_seed(seq_seed, 1));
  s.wk = random_matrix(d, d, derive_seed(seq_seed, 2));
  s.wv = random_matrix(d, d, derive_seed(seq_seed, 3));
  s.wo = random_matrix(d, d, derive_seed(seq_seed, 4));
  s.w1 = random_matrix(d, 4ULL * d, derive_seed(seq_seed, 5));
  s.b1 = random_vector(4ULL * d, 0.1f, derive_seed(seq_seed, 6));
  s.w2 = random_matrix(4ULL * d, d, derive_seed(seq_seed, 7));
  s.b2 = random_vector(d, 0.1f, derive_seed(seq_seed, 8));

  const std::size_t interaction_in = user_width + (p.has_history() ? d : 0) +
                                     item_in;
  p.interaction = random_mlp(interaction_in, config.hidden, config.hidden, true,
                             derive_seed(seed, kTagInteraction));
  p.head.tasks = config.tasks;
  p.head.w = random_matrix(config.hidden, config.tasks.size(),
                           derive_seed(seed, kTagHead));
  p.head.b = random_vector(config.tasks.size(), 0.1f,
                           derive_seed(seed, kTagHead + 100));
  return p;
}

void ForwardCounters::merge(const ForwardCounters& o) {
  b_ro += o.b_ro;
  b_nro += o.b_nro;
  ro_flops += o.ro_flops;
  nro_flops += o.nro_flops;
  for (const auto& [k, v] : o.rows_fetched) rows_fetched[k] += v;
  for (const auto& [k, v] : o.bytes_moved) bytes_moved[k] += v;
  target_item_rows += o.target_item_rows;
  empty_history_rows += o.empty_history_rows;
}

void ForwardCounters::fetched(FeatureId feature, std::uint64_t rows,
                              std::uint32_t dim) {
  rows_fetched[feature] += rows;
  bytes_moved[feature] += rows * dim * sizeof(float);
}

Matrix pooled_lookup(const EmbeddingTable& table, const KeyedJagged& jagged,
                     FeatureId feature, ForwardCounters* counters) {
  const std::size_t k = jagged.key_index(feature);
  Matrix out(jagged.rows(), table.dim());
  std::uint64_t fetched = 0;
  for (std::size_t r = 0; r < jagged.rows(); ++r) {
    auto dst = out.row(r);
    for (std::uint64_t id : jagged.row(k, r)) {
      auto src = table.lookup(id);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      ++fetched;
    }
  }
  if (counters != nullptr) counters->fetched(feature, fetched, table.dim());
  return out;
}

Matrix lookup_ro(const ModelParams& params, const JaggedBatch& batch,
                 FeatureId feature, ForwardCounters* counters) {
  if (params.registry.kind_of(feature) != FeatureKind::kRoIdList) {
    throw std::invalid_argument("feature " + std::to_string(feature) +
                                " is not a registered RO id-list feature");
  }
  auto it = params.feature_tables.find(feature);
  if (it == params.feature_tables.end()) {
    throw std::invalid_argument("feature " + std::to_string(feature) +
                                " has no pooled embedding table");
  }
  return pooled_lookup(it->second, batch.ro_idlist, feature, counters);
}

Tensor3 lce_compress(const Tensor3& x, const LceParams& p,
                     ForwardCounters* counters) {
  require_shape(x.dim1() == p.d_in && x.dim2() == p.n_in,
                "lce_compress input must be [B x d_in x n_in]");
  require_shape(p.w_compress.rows() == p.n_in && p.w_compress.cols() == p.n_out &&
                    p.b_compress.size() == p.n_out,
                "lce_compress weights");
  // g(X): [B*d_in x n_in] is X's row-major storage reinterpreted.
  const Matrix g(x.dim0() * p.d_in, p.n_in, x.data());
  Matrix f = matmul(g, p.w_compress, p.b_compress);
  add_flops(counters, matmul_flops(g.rows(), p.n_in, p.n_out), 0);
  Tensor3 out(x.dim0(), p.d_in, p.n_out);
  out.data() = std::move(f.data());
  return out;
}

Tensor3 lce_project(const Tensor3& y, const LceParams& p,
                    ForwardCounters* counters) {
  require_shape(y.dim1() == p.d_in && y.dim2() == p.n_out,
                "lce_project input must be [B x d_in x n_out]");
  require_shape(p.w_project.rows() == p.d_in && p.w_project.cols() == p.d_out &&
                    p.b_project.size() == p.d_out,
                "lce_project weights");
  const std::size_t batch = y.dim0();
  // g'(Y): permute to [B x n_out x d_in], flatten to [B*n_out x d_in].
  Matrix g(batch * p.n_out, p.d_in);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::uint32_t o = 0; o < p.n_out; ++o) {
      for (std::uint32_t i = 0; i < p.d_in; ++i) g(b * p.n_out + o, i) = y(b, i, o);
    }
  }
  Matrix f = matmul(g, p.w_project, p.b_project);
  add_flops(counters, matmul_flops(g.rows(), p.d_in, p.d_out), 0);
  Tensor3 out(batch, p.n_out, p.d_out);
  out.data() = std::move(f.data());
  return out;
}

Tensor3 user_arch_forward(const Tensor3& x, const LceParams& p,
                          ForwardCounters* counters) {
  return lce_project(lce_compress(x, p, counters), p, counters);
}

Tensor3 stack_ro_embeddings(const ModelParams& params, const JaggedBatch& batch,
                            ForwardCounters* counters) {
  const LceParams& lce = params.lce;
  if (lce.n_in == 0) {
    throw std::invalid_argument("user arch has no request-only embeddings");
  }
  const std::uint32_t d = params.config.dim;
  std::vector<Matrix> slots;
  for (FeatureId id : params.user_arch_features()) {
    slots.push_back(lookup_ro(params, batch, id, counters));
  }
  if (!params.ro_dense_proj.empty()) {
    slots.push_back(matmul(batch.ro_dense, params.ro_dense_proj, params.ro_dense_bias));
    add_flops(counters,
              matmul_flops(batch.b_ro, params.ro_dense_proj.rows(), d), 0);
  }
  Tensor3 x(batch.b_ro, d, slots.size());
  for (std::size_t b = 0; b < batch.b_ro; ++b) {
    for (std::size_t s = 0; s < slots.size(); ++s) {
      for (std::uint32_t i = 0; i < d; ++i) x(b, i, s) = slots[s](b, i);
    }
  }
  return x;
}

SequenceBatch build_history(const ModelParams& params, const JaggedBatch& batch,
                            ForwardCounters* counters) {
  const ModelConfig& cfg = params.config;
  if (!cfg.history_items) {
    throw std::invalid_argument("model has no history feature configured");
  }
  const std::uint32_t d = cfg.dim;
  const std::size_t n = cfg.n_max;
  const KeyedJagged& kj = batch.ro_idlist;
  const std::size_t k_items = kj.key_index(*cfg.history_items);
  std::optional<std::size_t> k_actions, k_contexts;
  if (cfg.history_actions) k_actions = kj.key_index(*cfg.history_actions);
  if (cfg.history_contexts) k_contexts = kj.key_index(*cfg.history_contexts);

  SequenceBatch out{Tensor3(batch.b_ro, n, d),
                    std::vector<std::uint8_t>(batch.b_ro * n, 0)};
  std::uint64_t kept_total = 0;
  for (std::size_t r = 0; r < batch.b_ro; ++r) {
    const auto items = kj.row(k_items, r);
    auto aligned = [&](std::optional<std::size_t> k) {
      std::span<const std::uint64_t> ids;
      if (k) {
        ids = kj.row(*k, r);
        if (ids.size() != items.size()) {
          throw std::invalid_argument("history side features are not aligned "
                                      "with history items in request " +
                                      std::to_string(batch.request_ids[r]));
        }
      }
      return ids;
    };
    const auto actions = aligned(k_actions);
    const auto contexts = aligned(k_contexts);

    const std::size_t kept = std::min(items.size(), n);
    const std::size_t skip = items.size() - kept;
    const std::size_t pad = n - kept;
    kept_total += kept;
    for (std::size_t i = 0; i < kept; ++i) {
      const std::size_t pos = pad + i;
      out.mask[r * n + pos] = 1;
      auto item = params.item_table.lookup(items[skip + i]);
      for (std::uint32_t c = 0; c < d; ++c) out.tokens(r, pos, c) = item[c];
      if (!actions.empty()) {
        auto a = params.action_table.lookup(actions[skip + i]);
        for (std::uint32_t c = 0; c < d; ++c) out.tokens(r, pos, c) += a[c];
      }
      if (!contexts.empty()) {
        auto ctx = params.context_table.lookup(contexts[skip + i]);
        for (std::uint32_t c = 0; c < d; ++c) out.tokens(r, pos, c) += ctx[c];
      }
    }
  }
  if (counters != nullptr) {
    counters->fetched(*cfg.history_items, kept_total, d);
    if (cfg.history_actions) counters->fetched(*cfg.history_actions, kept_total, d);
    if (cfg.history_contexts) counters->fetched(*cfg.history_contexts, kept_total, d);
  }
  return out;
}

std::vector<float> softmax(std::span<const float> scores) {
  std::vector<float> w(scores.size());
  if (scores.empty()) return w;
  const float m = *std::max_element(scores.begin(), scores.end());
  float z = 0.0f;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - m);
    z += w[i];
  }
  for (float& v : w) v /= z;
  return w;
}

Matrix seq_encode_retrieval(const SequenceBatch& history,
                            const SeqEncoderParams& p, SeqPooling pooling,
                            ForwardCounters* counters) {
  require_shape(history.tokens.dim2() == p.d, "history token width != d");
  const std::size_t n = history.length();
  Matrix out(history.rows(), p.d);
  std::uint64_t flops = 0;
  for (std::size_t r = 0; r < history.rows(); ++r) {
    std::vector<std::size_t> valid;
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (history.valid(r, pos)) valid.push_back(pos);
    }
    if (valid.empty()) {
      if (counters != nullptr) ++counters->empty_history_rows;
      continue;
    }
    auto token = [&](std::size_t pos) {
      return std::span<const float>(&history.tokens.data()[(r * n + pos) * p.d], p.d);
    };
    std::vector<KeyValue> kv;
    kv.reserve(valid.size());
    for (std::size_t pos : valid) kv.push_back(project_kv(token(pos), p));
    flops += kv_flops(p.d) * valid.size();

    auto output_at = [&](std::size_t i) {
      std::vector<const KeyValue*> visible;
      for (std::size_t j = 0; j <= i; ++j) visible.push_back(&kv[j]);
      return encode_query(token(valid[i]), visible, p, &flops);
    };
    auto dst = out.row(r);
    if (pooling == SeqPooling::kLastValid) {
      auto y = output_at(valid.size() - 1);
      std::copy(y.begin(), y.end(), dst.begin());
    } else {
      for (std::size_t i = 0; i < valid.size(); ++i) {
        auto y = output_at(i);
        for (std::uint32_t c = 0; c < p.d; ++c) dst[c] += y[c];
      }
      const float inv = 1.0f / static_cast<float>(valid.size());
      for (float& v : dst) v *= inv;
    }
  }
  add_flops(counters, flops, 0);
  return out;
}

Matrix seq_encode_ranking(const SequenceBatch& history, const Matrix& targets,
                          std::span<const std::uint32_t> impressions_per_sample,
                          const SeqEncoderParams& p, ForwardCounters* counters) {
  require_shape(history.tokens.dim2() == p.d, "history token width != d");
  require_shape(targets.cols() == p.d, "target width != d");
  require_shape(impressions_per_sample.size() == history.rows(),
                "one impression count per history row");
  std::size_t total = 0;
  for (std::uint32_t m : impressions_per_sample) {
    if (m == 0) throw std::invalid_argument("seq_encode_ranking: row with m=0");
    total += m;
  }
  require_shape(total == targets.rows(), "targets must cover every impression");

  const std::size_t n = history.length();
  Matrix out(targets.rows(), p.d);
  std::uint64_t ro_flops = 0;
  std::uint64_t nro_flops = 0;
  std::size_t j = 0;
  for (std::size_t r = 0; r < history.rows(); ++r) {
    std::vector<KeyValue> kv;
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (!history.valid(r, pos)) continue;
      kv.push_back(project_kv(
          std::span<const float>(&history.tokens.data()[(r * n + pos) * p.d], p.d),
          p));
    }
    ro_flops += kv_flops(p.d) * kv.size();

    std::vector<const KeyValue*> visible;
    for (const KeyValue& e : kv) visible.push_back(&e);
    for (std::uint32_t t = 0; t < impressions_per_sample[r]; ++t, ++j) {
      auto target = targets.row(j);
      const KeyValue self = project_kv(target, p);
      nro_flops += kv_flops(p.d);
      visible.push_back(&self);
      auto y = encode_query(target, visible, p, &nro_flops);
      visible.pop_back();
      std::copy(y.begin(), y.end(), out.row(j).begin());
    }
  }
  add_flops(counters, ro_flops, nro_flops);
  return out;
}

Matrix mlp2_forward(const Mlp2& mlp, const Matrix& x, std::uint64_t* flops) {
  Matrix h = matmul(x, mlp.w1, mlp.b1);
  relu_inplace(h);
  Matrix y = matmul(h, mlp.w2, mlp.b2);
  if (mlp.relu_output) relu_inplace(y);
  if (flops != nullptr) {
    *flops += matmul_flops(x.rows(), mlp.w1.rows(), mlp.w1.cols()) +
              matmul_flops(x.rows(), mlp.w2.rows(), mlp.w2.cols());
  }
  return y;
}

namespace {

Matrix target_embeddings(const ModelParams& params, const JaggedBatch& batch,
                         ForwardCounters* counters) {
  Matrix out(batch.b_nro, params.config.dim);
  for (std::size_t j = 0; j < batch.b_nro; ++j) {
    auto src = params.item_table.lookup(batch.items[j]);
    std::copy(src.begin(), src.end(), out.row(j).begin());
  }
  if (counters != nullptr) counters->target_item_rows += batch.b_nro;
  return out;
}

// [item embedding | pooled item-side id lists | item-side dense]
Matrix item_inputs(const ModelParams& params, const JaggedBatch& batch,
                   const Matrix& item_emb, ForwardCounters* counters) {
  std::vector<Matrix> pooled;
  for (FeatureId id : params.item_features()) {
    pooled.push_back(pooled_lookup(params.feature_tables.at(id), batch.nro_idlist,
                                   id, counters));
  }
  std::vector<const Matrix*> parts{&item_emb};
  for (const Matrix& m : pooled) parts.push_back(&m);
  parts.push_back(&batch.nro_dense);
  return concat_cols(parts);
}

Matrix user_arch_rows(const ModelParams& params, const JaggedBatch& batch,
                      ForwardCounters* counters) {
  return flatten(user_arch_forward(stack_ro_embeddings(params, batch, counters),
                                   params.lce, counters));
}

}  // namespace

Matrix item_tower_forward(const ModelParams& params, const JaggedBatch& batch,
                          ForwardCounters* counters) {
  const Matrix item_emb = target_embeddings(params, batch, counters);
  const Matrix x = item_inputs(params, batch, item_emb, counters);
  std::uint64_t flops = 0;
  Matrix y = mlp2_forward(params.item_tower, x, &flops);
  add_flops(counters, 0, flops);
  return y;
}

std::vector<float> two_tower_forward(const ModelParams& params,
                                     const JaggedBatch& batch, UserTower tower,
                                     ForwardCounters* counters) {
  Matrix users;
  if (tower == UserTower::kUserArch) {
    const Matrix flat = user_arch_rows(params, batch, counters);
    users = matmul(flat, params.user_proj, params.user_bias);
    add_flops(counters,
              matmul_flops(flat.rows(), flat.cols(), params.user_proj.cols()), 0);
  } else {
    users = seq_encode_retrieval(build_history(params, batch, counters), params.seq,
                                 params.config.pooling, counters);
  }
  const Matrix items = item_tower_forward(params, batch, counters);
  const FanoutIndex f = fanout(batch);
  std::vector<float> scores(batch.b_nro);
  for (std::size_t j = 0; j < batch.b_nro; ++j) {
    scores[j] = dot(users.row(f.row_map[j]), items.row(j));
  }
  add_flops(counters, 0, 2ULL * batch.b_nro * params.config.dim);
  return scores;
}

Matrix lsr_forward(const ModelParams& params, const JaggedBatch& batch,
                   ForwardCounters* counters) {
  const FanoutIndex f = fanout(batch);
  const Matrix user = gather_rows(user_arch_rows(params, batch, counters), f.row_map);
  const Matrix item_emb = target_embeddings(params, batch, counters);
  Matrix seq_out;
  if (params.has_history()) {
    seq_out = seq_encode_ranking(build_history(params, batch, counters), item_emb,
                                 batch.impressions_per_sample, params.seq,
                                 counters);
  }
  const Matrix items = item_inputs(params, batch, item_emb, counters);
  std::vector<const Matrix*> parts{&user};
  if (params.has_history()) parts.push_back(&seq_out);
  parts.push_back(&items);
  const Matrix x = concat_cols(parts);

  std::uint64_t flops = 0;
  const Matrix h = mlp2_forward(params.interaction, x, &flops);
  Matrix logits = matmul(h, params.head.w, params.head.b);
  flops += matmul_flops(h.rows(), h.cols(), params.head.w.cols());
  add_flops(counters, 0, flops);
  return logits;
}

const char* to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kTwoTower:
      return "two_tower";
    case Architecture::kRetrieval:
      return "retrieval";
    case Architecture::kRankingEncoder:
      return "ranking_encoder";
    case Architecture::kLsr:
      return "lsr";
  }
  return "unknown";
}

std::optional<Architecture> parse_architecture(std::string_view name) {
  for (auto a : {Architecture::kTwoTower, Architecture::kRetrieval,
                 Architecture::kRankingEncoder, Architecture::kLsr}) {
    if (name == to_string(a)) return a;
  }
  return std::nullopt;
}

ForwardOutput run_forward(const ModelParams& params, const JaggedBatch& batch,
                          Architecture arch) {
  check_batch(batch);
  ForwardOutput out;
  out.counters.b_ro = batch.b_ro;
  out.counters.b_nro = batch.b_nro;
  ForwardCounters* c = &out.counters;
  switch (arch) {
    case Architecture::kTwoTower:
    case Architecture::kRetrieval: {
      auto scores = two_tower_forward(
          params, batch,
          arch == Architecture::kTwoTower ? UserTower::kUserArch : UserTower::kSequence,
          c);
      const std::size_t n = scores.size();
      out.values = Matrix(n, 1, std::move(scores));
      break;
    }
    case Architecture::kRankingEncoder:
      out.values = seq_encode_ranking(build_history(params, batch, c),
                                      target_embeddings(params, batch, c),
                                      batch.impressions_per_sample, params.seq, c);
      break;
    case Architecture::kLsr:
      out.values = lsr_forward(params, batch, c);
      break;
  }
  return out;
}

ForwardOutput expanded_forward_oracle(const std::vector<RequestSample>& samples,
                                      const ModelParams& params,
                                      const BatchConfig& batch_config,
                                      Architecture arch) {
  std::vector<ImpressionSample> expanded;
  for (const RequestSample& s : samples) {
    for (auto& imp : expand_request_sample(s, params.registry)) {
      expanded.push_back(std::move(imp));
    }
  }
  return run_forward(params,
                     build_impression_batch(expanded, params.registry, batch_config),
                     arch);
}

double max_relative_difference(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_relative_difference: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    const double scale = std::max(std::abs(x), std::abs(y));
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(x - y) / scale);
  }
  return worst;
}

}  // namespace roo
