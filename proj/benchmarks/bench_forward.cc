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
#include "roo/pipeline.h"

namespace {

using namespace roo;

struct Fixture {
  HarnessConfig config;
  FeatureRegistry registry;
  ModelParams params;
  std::vector<RequestSample> samples;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.config = default_config();
    x.config.generator.num_users = 64;
    x.config.generator.requests_per_user = 4;
    x.config.generator.window_ms = 1000;
    x.config.joiner.window_ms = 1000;
    x.registry = generator_registry(x.config.generator);
    x.params = pipeline_params(x.config, x.registry);
    x.samples = join_stream(generate_events(x.config.generator), x.config.joiner);
    x.samples.resize(std::min<std::size_t>(x.samples.size(), 128));
    return x;
  }();
  return f;
}

// Request-level forward pass over one batch of requests.
void BM_ForwardRoo(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto arch = static_cast<Architecture>(state.range(0));
  const JaggedBatch batch = build_batch(f.samples, f.registry, f.config.batch);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_forward(f.params, batch, arch));
  }
  state.SetLabel(to_string(arch));
  state.counters["impressions"] = batch.b_nro;
}

// The same requests expanded to one row per impression.
void BM_ForwardImpression(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto arch = static_cast<Architecture>(state.range(0));
  std::vector<ImpressionSample> imps;
  for (const auto& s : f.samples) {
    for (auto& i : expand_request_sample(s)) imps.push_back(std::move(i));
  }
  const JaggedBatch batch = build_impression_batch(imps, f.registry, f.config.batch);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_forward(f.params, batch, arch));
  }
  state.SetLabel(to_string(arch));
  state.counters["impressions"] = batch.b_nro;
}

BENCHMARK(BM_ForwardRoo)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardImpression)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace
