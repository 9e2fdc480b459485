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


#include <random>

#include <doctest.h>

#include "roo/batcher.h"
#include "test_util.h"

using namespace roo;
using roo::testing::make_registry;
using roo::testing::random_samples;

namespace {

BatchConfig two_tasks() {
  return {{{"engagement", {{1, 1.0f}}}, {"duration", {{2, 10.0f}, {3, 30.0f}}}}};
}

RequestSample tiny(RequestId id, std::vector<ItemId> items) {
  RequestSample s;
  s.request_id = id;
  s.user_id = id * 10;
  s.ro_dense[1] = static_cast<float>(id);
  s.ro_idlist[100] = {id, id + 1};
  for (std::size_t i = 0; i < items.size(); ++i) {
    s.items.push_back(items[i]);
    s.conversions.push_back(i == 0 ? std::vector<LabelId>{1, 3} : std::vector<LabelId>{2});
    s.nro_dense[200].push_back(static_cast<float>(items[i]) / 2);
    s.nro_idlist[300].push_back(std::vector<std::uint64_t>(i, items[i]));
  }
  return s;
}

FeatureRegistry tiny_registry() {
  FeatureRegistry r;
  r.add(FeatureKind::kRoDense, 1);
  r.add(FeatureKind::kRoIdList, 100);
  r.add(FeatureKind::kNroDense, 200);
  r.add(FeatureKind::kNroIdList, 300);
  return r;
}

}  // namespace

TEST_CASE("build_batch lays out a hand-checked example") {
  const JaggedBatch b =
      build_batch({tiny(1, {7, 8, 9}), tiny(2, {4})}, tiny_registry(), two_tasks());
  CHECK(b.b_ro == 2);
  CHECK(b.b_nro == 4);
  CHECK(b.impressions_per_sample == std::vector<std::uint32_t>{3, 1});
  CHECK(b.request_ids == std::vector<RequestId>{1, 2});
  CHECK(b.user_ids == std::vector<UserId>{10, 20});
  CHECK(b.items == std::vector<ItemId>{7, 8, 9, 4});
  CHECK(b.ro_dense == Matrix(2, 1, std::vector<float>{1, 2}));
  CHECK(b.ro_idlist.values[0] == std::vector<std::uint64_t>{1, 2, 2, 3});
  CHECK(b.ro_idlist.offsets[0] == std::vector<std::size_t>{0, 2, 4});
  CHECK(b.nro_dense == Matrix(4, 1, std::vector<float>{3.5f, 4, 4.5f, 2}));
  CHECK(b.nro_idlist.lengths[0] == std::vector<std::uint32_t>{0, 1, 2, 0});
  CHECK(b.nro_idlist.values[0] == std::vector<std::uint64_t>{8, 9, 9});
  CHECK(b.labels[0] == std::vector<float>{1, 0, 0, 1});
  CHECK(b.labels[1] == std::vector<float>{30, 10, 10, 30});
  CHECK(fanout(b).row_map == std::vector<std::uint32_t>{0, 0, 0, 1});
  CHECK_NOTHROW(check_batch(b));
}

TEST_CASE("batch invariants hold on random inputs") {
  std::mt19937_64 rng(21);
  const FeatureRegistry reg = make_registry({});
  for (int trial = 0; trial < 50; ++trial) {
    const auto samples = random_samples(rng, reg, 1 + rng() % 40, 1, 8);
    const JaggedBatch b = build_batch(samples, reg, two_tasks());
    CHECK_NOTHROW(check_batch(b));
    std::uint64_t total = 0;
    for (auto k : b.impressions_per_sample) total += k;
    CHECK(total == b.b_nro);
    const auto map = fanout(b).row_map;
    REQUIRE(map.size() == b.b_nro);
    // Gathering the RO rows through the fanout reproduces the impression batch.
    std::vector<ImpressionSample> imps;
    for (const auto& s : samples) {
      for (auto& i : expand_request_sample(s)) imps.push_back(std::move(i));
    }
    const JaggedBatch flat = build_impression_batch(imps, reg, two_tasks());
    CHECK(gather_rows(b.ro_dense, map) == flat.ro_dense);
    CHECK(b.nro_dense == flat.nro_dense);
    CHECK(b.nro_idlist == flat.nro_idlist);
    CHECK(b.labels == flat.labels);
    CHECK(b.items == flat.items);
    for (std::size_t k = 0; k < b.ro_idlist.keys.size(); ++k) {
      for (std::uint32_t j = 0; j < b.b_nro; ++j) {
        const auto a = b.ro_idlist.row(k, map[j]);
        const auto e = flat.ro_idlist.row(k, j);
        CHECK(std::vector<std::uint64_t>(a.begin(), a.end()) ==
              std::vector<std::uint64_t>(e.begin(), e.end()));
      }
    }
    for (std::uint32_t j = 1; j < b.b_nro; ++j) CHECK(map[j - 1] <= map[j]);
  }
}

TEST_CASE("impression batches have one RO row per impression") {
  std::mt19937_64 rng(22);
  const FeatureRegistry reg = make_registry({});
  const auto samples = random_samples(rng, reg, 5, 2, 4);
  std::vector<ImpressionSample> imps;
  for (const auto& s : samples) {
    for (auto& i : expand_request_sample(s)) imps.push_back(std::move(i));
  }
  const JaggedBatch b = build_impression_batch(imps, reg, two_tasks());
  CHECK(b.b_ro == b.b_nro);
  CHECK(b.b_ro == imps.size());
  for (auto k : b.impressions_per_sample) CHECK(k == 1);
}

TEST_CASE("build_batch rejects bad input") {
  const FeatureRegistry reg = tiny_registry();
  CHECK_THROWS_AS(build_batch({}, reg, two_tasks()), std::invalid_argument);
  CHECK_THROWS_AS(build_impression_batch({}, reg, two_tasks()), std::invalid_argument);
  auto s = tiny(1, {1, 2});
  s.ro_dense[77] = 1.0f;
  CHECK_THROWS(build_batch({s}, reg, two_tasks()));
  s = tiny(1, {1, 2});
  s.ro_idlist.erase(100);
  CHECK_THROWS(build_batch({s}, reg, two_tasks()));
  s = tiny(1, {1, 2});
  s.conversions.pop_back();
  CHECK_THROWS_AS(build_batch({s}, reg, two_tasks()), ValidationError);
}

TEST_CASE("check_batch detects inconsistent counts") {
  JaggedBatch b = build_batch({tiny(1, {3, 4})}, tiny_registry(), two_tasks());
  b.impressions_per_sample[0] = 3;
  CHECK_THROWS_AS(check_batch(b), std::invalid_argument);
  b = build_batch({tiny(1, {3, 4})}, tiny_registry(), two_tasks());
  b.labels[1].pop_back();
  CHECK_THROWS_AS(check_batch(b), std::invalid_argument);
  b = build_batch({tiny(1, {3, 4})}, tiny_registry(), two_tasks());
  b.impressions_per_sample = {0, 2};
  b.b_ro = 2;
  CHECK_THROWS_AS(check_batch(b), std::invalid_argument);
}

TEST_CASE("keyed jagged lookups") {
  KeyedJagged kj = make_keyed_jagged({5, 9});
  const std::vector<std::uint64_t> a{1, 2}, none{}, c{3};
  kj.push_row(0, a);
  kj.push_row(0, none);
  kj.push_row(1, c);
  kj.push_row(1, a);
  CHECK(kj.rows() == 2);
  CHECK(kj.key_index(9) == 1);
  CHECK_THROWS_AS(kj.key_index(6), std::out_of_range);
  CHECK(kj.row(0, 1).empty());
  CHECK(kj.row(1, 1)[1] == 2);
}

TEST_CASE("merge_sequences concatenates in order or by time") {
  const IdListMap f{{1, {10, 11}}, {2, {20}}};
  const std::vector<FeatureId> order{2, 1};
  CHECK(merge_sequences(f, order) == std::vector<std::uint64_t>{20, 10, 11});
  const std::map<FeatureId, std::vector<std::int64_t>> ts{{1, {5, 30}}, {2, {5}}};
  // Ties keep concatenation order.
  CHECK(merge_sequences(f, order, &ts) == std::vector<std::uint64_t>{20, 10, 11});
  const std::map<FeatureId, std::vector<std::int64_t>> ts2{{1, {5, 1}}, {2, {3}}};
  CHECK(merge_sequences(f, order, &ts2) == std::vector<std::uint64_t>{11, 20, 10});
  const std::vector<FeatureId> bad{3};
  CHECK_THROWS_AS(merge_sequences(f, bad), std::invalid_argument);
  const std::map<FeatureId, std::vector<std::int64_t>> short_ts{{1, {5}}, {2, {5}}};
  CHECK_THROWS_AS(merge_sequences(f, order, &short_ts), std::invalid_argument);

  KeyedJagged kj = make_keyed_jagged({1, 2});
  kj.push_row(0, f.at(1));
  kj.push_row(1, f.at(2));
  CHECK(merge_sequences(kj, order) ==
        std::vector<std::vector<std::uint64_t>>{{20, 10, 11}});
}

TEST_CASE("dedup keeps first or last occurrences") {
  const std::vector<std::uint64_t> seq{3, 1, 3, 2, 1};
  CHECK(dedup_ids(seq) == std::vector<std::uint64_t>{3, 1, 2});
  CHECK(dedup_ids(seq, DedupKeep::kLast) == std::vector<std::uint64_t>{3, 2, 1});
  CHECK(dedup_ids(std::vector<std::uint64_t>{}).empty());
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const auto ids = roo::testing::random_ids(rng, 30, 10);
    for (auto keep : {DedupKeep::kFirst, DedupKeep::kLast}) {
      const auto d = dedup_ids(ids, keep);
      CHECK(std::set<std::uint64_t>(d.begin(), d.end()).size() == d.size());
      CHECK(std::set<std::uint64_t>(d.begin(), d.end()) ==
            std::set<std::uint64_t>(ids.begin(), ids.end()));
      CHECK(dedup_ids(d, keep) == d);
    }
  }
}

TEST_CASE("normalize_dense clamps then standardises") {
  const Matrix m(2, 2, std::vector<float>{1, 100, -5, 4});
  const std::vector<NormParams> p{{1.0f, 2.0f, -1.0f, 3.0f}, {4.0f, 0.5f}};
  const Matrix out = normalize_dense(m, p);
  CHECK(out == Matrix(2, 2, std::vector<float>{0, 192, -1, 0}));
  const std::vector<NormParams> zero{{0, 0}, {0, 1}};
  CHECK_THROWS_AS(normalize_dense(m, zero), std::invalid_argument);
  CHECK_THROWS_AS(normalize_dense(m, std::span(p).first(1)), std::invalid_argument);
  FeatureMeta meta;
  meta.norm_mean = 2;
  meta.norm_std = 4;
  CHECK(norm_params(meta).std == 4.0f);
}

TEST_CASE("truncate_and_mask keeps the suffix and left-pads") {
  const std::vector<std::uint64_t> seq{5, 6, 7, 8};
  auto t = truncate_and_mask(seq, 2);
  CHECK(t.ids == std::vector<std::uint64_t>{7, 8});
  CHECK(t.mask == std::vector<std::uint8_t>{1, 1});
  t = truncate_and_mask(seq, 6);
  CHECK(t.ids == std::vector<std::uint64_t>{0, 0, 5, 6, 7, 8});
  CHECK(t.mask == std::vector<std::uint8_t>{0, 0, 1, 1, 1, 1});
  t = truncate_and_mask(std::vector<std::uint64_t>{}, 3);
  CHECK(t.mask == std::vector<std::uint8_t>{0, 0, 0});
  CHECK_THROWS_AS(truncate_and_mask(seq, 0), std::invalid_argument);
}

TEST_CASE("batch_to_json is deterministic and parseable") {
  const JaggedBatch b = build_batch({tiny(1, {7, 8})}, tiny_registry(), two_tasks());
  const std::string a = batch_to_json(b);
  CHECK(a == batch_to_json(b));
  CHECK(a.find("\"b_nro\":2") != std::string::npos);
}
