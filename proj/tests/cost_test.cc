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


#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "roo/cost.h"
#include "roo/model.h"
#include "test_util.h"

using namespace roo;

namespace {

// Counts the attention-block work of one sequence of length L by walking
// every (query, key) pair and every projection row.
std::uint64_t counted_block(std::uint64_t len, std::uint64_t d) {
  std::uint64_t flops = 0;
  for (std::uint64_t q = 0; q < len; ++q) {
    for (std::uint64_t k = 0; k < len; ++k) flops += d;  // q.k
    flops += d * d;                                     // projection
  }
  return flops;
}

// Request with one RO id-list feature and one NRO id-list feature.
RequestSample fig3_request(std::uint32_t k) {
  RequestSample s;
  s.request_id = 1;
  s.user_id = 1;
  s.ro_idlist[100] = {42};
  for (std::uint32_t i = 0; i < k; ++i) {
    s.items.push_back(10 + i);
    s.conversions.push_back({});
    s.nro_idlist[300].push_back({20 + i});
  }
  return s;
}

FeatureRegistry fig3_registry() {
  FeatureRegistry r;
  r.add(FeatureKind::kRoIdList, 100);
  r.add(FeatureKind::kNroIdList, 300);
  return r;
}

CostReport measure(const std::vector<RequestSample>& samples, const FeatureRegistry& reg,
                   Architecture arch) {
  const ModelParams params = init_params(ModelConfig{}, reg);
  const BatchConfig bc{{{"engagement", {{1, 1.0f}}}}};
  const ForwardOutput roo = run_forward(params, build_batch(samples, reg, bc), arch);
  const ForwardOutput imp = expanded_forward_oracle(samples, params, bc, arch);
  return measure_run({"r", roo.counters}, {"r", imp.counters});
}

}  // namespace

TEST_CASE("sequence cost formulas") {
  CHECK(impression_seq_cost(0, 5, 7) == 0);
  CHECK(impression_seq_cost(1, 1, 1) == 2);
  CHECK(impression_seq_cost(1000, 10, 256) == 3'215'360'000ULL);
  CHECK(roo_seq_cost(0, 0, 9) == 0);
  CHECK(roo_seq_cost(1, 1, 1) == 6);
  CHECK(roo_seq_cost(1000, 10, 256) == 327'336'960ULL);
}

TEST_CASE("formulas agree with explicit pair counting") {
  for (std::uint64_t n : {0u, 1u, 3u, 17u}) {
    for (std::uint64_t m : {1u, 2u, 5u}) {
      for (std::uint64_t d : {1u, 4u, 8u}) {
        CHECK(impression_seq_cost(n, m, d) == m * counted_block(n, d));
        CHECK(roo_seq_cost(n, m, d) == counted_block(n + m, d));
      }
    }
  }
}

TEST_CASE("savings ratio") {
  CHECK(seq_savings_ratio(1000, 10, 256) == doctest::Approx(9.82).epsilon(0.001));
  CHECK(std::abs(seq_savings_ratio(1000, 10, 256) - 9.82) <= 0.01);
  CHECK(seq_savings_ratio(1, 1, 1) == doctest::Approx(1.0 / 3.0));
  // Independent evaluation in long double.
  const long double imp = 5.0L * (500.0L * 500 * 128 + 500.0L * 128 * 128);
  const long double roo = 505.0L * 505 * 128 + 505.0L * 128 * 128;
  CHECK(seq_savings_ratio(500, 5, 128) == doctest::Approx(static_cast<double>(imp / roo)));
  CHECK_THROWS_AS(seq_savings_ratio(0, 0, 5), std::domain_error);
  CHECK_THROWS_AS(seq_savings_ratio(3, 3, 0), std::domain_error);
}

TEST_CASE("savings ratio tends to m for long histories") {
  CHECK(std::abs(seq_savings_ratio(100'000, 10, 256) - 10.0) <= 0.5);
}

TEST_CASE("cost formulas are strictly monotone") {
  for (std::uint64_t n = 1; n < 6; ++n) {
    for (std::uint64_t m = 1; m < 6; ++m) {
      for (std::uint64_t d = 1; d < 6; ++d) {
        for (auto f : {impression_seq_cost, roo_seq_cost}) {
          CHECK(f(n + 1, m, d) > f(n, m, d));
          CHECK(f(n, m + 1, d) > f(n, m, d));
          CHECK(f(n, m, d + 1) > f(n, m, d));
        }
      }
    }
  }
}

TEST_CASE("overflow is reported instead of wrapping") {
  const std::uint64_t big = std::numeric_limits<std::uint32_t>::max();
  CHECK_THROWS_AS(impression_seq_cost(big, big, big), std::overflow_error);
  CHECK_THROWS_AS(roo_seq_cost(big, big, big), std::overflow_error);
  CHECK_NOTHROW(roo_seq_cost(1'000'000, 1'000, 1'000));
}

TEST_CASE("dedup ratio") {
  JaggedBatch b;
  CHECK_THROWS_AS(dedup_ratio(b), std::invalid_argument);
  b.b_ro = 1;
  b.b_nro = 1;
  CHECK(dedup_ratio(b) == 1.0);
  b.b_ro = 2;
  b.b_nro = 8;
  CHECK(dedup_ratio(b) == 4.0);
}

TEST_CASE("one request with four impressions fetches RO rows once") {
  const FeatureRegistry reg = fig3_registry();
  const CostReport r = measure({fig3_request(4)}, reg, Architecture::kTwoTower);
  CHECK(r.b_ro == 1);
  CHECK(r.b_nro == 4);
  CHECK(r.rows_fetched_roo.at(100) == 1);
  CHECK(r.rows_fetched_impression.at(100) == 4);
  CHECK(r.rows_fetched_roo.at(300) == r.rows_fetched_impression.at(300));
  CHECK(r.bytes_comm_impression > r.bytes_comm_roo);
  CHECK(r.savings_ratio > 1.0);
}

TEST_CASE("single-impression corpora report unit ratios") {
  const FeatureRegistry reg = fig3_registry();
  std::vector<RequestSample> samples;
  for (RequestId i = 1; i <= 6; ++i) {
    RequestSample s = fig3_request(1);
    s.request_id = i;
    samples.push_back(s);
  }
  for (Architecture arch : {Architecture::kTwoTower, Architecture::kLsr}) {
    const CostReport r = measure(samples, reg, arch);
    CHECK(r.b_ro == r.b_nro);
    CHECK(r.savings_ratio == 1.0);
    CHECK(r.rows_fetched_roo == r.rows_fetched_impression);
    CHECK(r.bytes_comm_roo == r.bytes_comm_impression);
  }
}

TEST_CASE("constant k makes RO ratios exact") {
  const FeatureRegistry reg = fig3_registry();
  std::vector<RequestSample> samples;
  for (RequestId i = 1; i <= 5; ++i) {
    RequestSample s = fig3_request(3);
    s.request_id = i;
    s.ro_idlist[100] = std::vector<std::uint64_t>(i, 7);
    samples.push_back(s);
  }
  const CostReport r = measure(samples, reg, Architecture::kLsr);
  CHECK(r.rows_fetched_impression.at(100) == 3 * r.rows_fetched_roo.at(100));
  CHECK(r.rows_fetched_roo.at(100) == 1 + 2 + 3 + 4 + 5);
}

TEST_CASE("measure_run checks that the runs belong together") {
  ForwardCounters a, b;
  a.b_nro = b.b_nro = 4;
  CHECK_THROWS_AS(measure_run({"x", a}, {"y", b}), std::invalid_argument);
  b.b_nro = 5;
  CHECK_THROWS_AS(measure_run({"x", a}, {"x", b}), std::invalid_argument);
  b.b_nro = 4;
  const CostReport r = measure_run({"x", a}, {"x", b});
  CHECK(r.savings_ratio == 0.0);
}

TEST_CASE("reports recompute from merged batch counters") {
  std::mt19937_64 rng(41);
  const FeatureRegistry reg = roo::testing::make_registry({});
  const auto samples = roo::testing::random_samples(rng, reg, 40, 1, 7);
  const ModelParams params = init_params(ModelConfig{}, reg);
  const BatchConfig bc{{{"engagement", {{1, 1.0f}}}}};
  ForwardCounters roo, imp;
  for (std::size_t b = 0; b < samples.size(); b += 8) {
    const std::vector<RequestSample> chunk(samples.begin() + b, samples.begin() + b + 8);
    roo.merge(run_forward(params, build_batch(chunk, reg, bc), Architecture::kLsr).counters);
    imp.merge(expanded_forward_oracle(chunk, params, bc, Architecture::kLsr).counters);
  }
  const CostReport r = measure_run({"z", roo}, {"z", imp});
  std::uint64_t b_nro = 0;
  for (const auto& s : samples) b_nro += s.items.size();
  CHECK(r.b_ro == samples.size());
  CHECK(r.b_nro == b_nro);
  CHECK(r.roo_flops == roo.ro_flops + roo.nro_flops);
  std::uint64_t bytes = 0;
  for (const auto& [f, n] : roo.rows_fetched) {
    CHECK(roo.bytes_moved.at(f) == n * params.config.dim * 4);
    bytes += roo.bytes_moved.at(f);
  }
  CHECK(r.bytes_comm_roo == bytes);
  // RO features: the impression run fetches each request's rows k times.
  for (FeatureId f : reg.ro_idlist()) {
    std::uint64_t want = 0;
    for (const auto& s : samples) want += s.ro_idlist.at(f).size() * s.items.size();
    CHECK(r.rows_fetched_impression.at(f) == want);
  }

  const CostReport back = cost_report_from_json(cost_report_to_json(r));
  CHECK(back.rows_fetched_roo == r.rows_fetched_roo);
  CHECK(back.impression_flops == r.impression_flops);
  CHECK(back.savings_ratio == doctest::Approx(r.savings_ratio).epsilon(1e-5));
  CHECK(counters_from_json(counters_to_json(roo)) == roo);
}
