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


#include <benchmark/benchmark.h>

#include "roo/config.h"
#include "roo/generator.h"
#include "roo/joiner.h"
#include "roo/store.h"

namespace {

using namespace roo;

const std::vector<RequestSample>& corpus() {
  static const std::vector<RequestSample> samples = [] {
    GeneratorConfig g;
    g.num_users = 256;
    g.requests_per_user = 4;
    g.window_ms = 1000;
    JoinerConfig j;
    j.window_ms = 1000;
    return join_stream(generate_events(g), j);
  }();
  return samples;
}

void BM_EncodeRequestBlock(benchmark::State& state) {
  const auto& samples = corpus();
  std::size_t bytes = 0;
  for (auto _ : state) bytes = encode_request_block(samples).size();
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}

void BM_DecodeRequestBlock(benchmark::State& state) {
  const std::string block = encode_request_block(corpus());
  for (auto _ : state) benchmark::DoNotOptimize(decode_request_block(block));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * block.size()));
}

void BM_DecodeImpressionBlock(benchmark::State& state) {
  std::vector<ImpressionSample> imps;
  for (const auto& s : corpus()) {
    for (auto& i : expand_request_sample(s)) imps.push_back(std::move(i));
  }
  const std::string block = encode_impression_block(imps);
  for (auto _ : state) benchmark::DoNotOptimize(decode_impression_block(block));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * block.size()));
}

void BM_Expand(benchmark::State& state) {
  const auto& samples = corpus();
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& s : samples) n += expand_request_sample(s).size();
    benchmark::DoNotOptimize(n);
  }
}

BENCHMARK(BM_EncodeRequestBlock)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeRequestBlock)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeImpressionBlock)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Expand)->Unit(benchmark::kMillisecond);

}  // namespace
