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


#ifndef ROO_PIPELINE_H_
#define ROO_PIPELINE_H_

// End-to-end runs: events -> joiner -> store -> batcher -> model, in either
// request-level (roo) or impression-level mode.
//
// A run directory holds
//   manifest.json        mode, stream hash, run id, counts, block list
//   config.ini           the effective configuration
//   blocks/*.roo         joined samples in the columnar store
//   joiner_metrics.json  join counters and latencies
//   counters.json        forward counters per architecture
//   outputs.jsonl        model outputs per (architecture, request, item)
//   footprint.json       storage footprint of the joined data

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roo/config.h"
#include "roo/event.h"
#include "roo/impression_joiner.h"
#include "roo/joiner.h"
#include "roo/model.h"
#include "roo/schema.h"
#include "roo/store.h"

namespace roo {

enum class RunMode { kRoo, kImpression };

const char* to_string(RunMode mode);
std::optional<RunMode> parse_run_mode(std::string_view name);

std::string sha256_hex(std::string_view bytes);
// SHA-256 of the event file's bytes; names the stream in every artifact.
std::string stream_hash(const std::filesystem::path& events_path);

struct OutputRow {
  RequestId request_id = 0;
  ItemId item_id = 0;
  std::vector<float> values;

  bool operator==(const OutputRow&) const = default;
};

struct ArchitectureRun {
  Architecture arch = Architecture::kTwoTower;
  ForwardCounters counters;
  std::vector<OutputRow> outputs;  // sorted by (request_id, item_id)
};

struct RunResult {
  RunMode mode = RunMode::kRoo;
  std::string stream_hash;
  std::string run_id;
  FeatureRegistry registry;
  // Joined data after the store round trip. roo mode fills request_samples,
  // impression mode fills impression_samples.
  std::vector<RequestSample> request_samples;
  std::vector<ImpressionSample> impression_samples;
  JoinerMetrics joiner_metrics;
  ImpressionJoinerMetrics impression_joiner_metrics;
  FootprintReport footprint;
  std::uint64_t batches = 0;
  std::vector<std::string> blocks;
  std::vector<ArchitectureRun> runs;
  std::vector<Architecture> skipped;  // need history the stream lacks
};

// In-memory run. Blocks are encoded and decoded even when out_dir is empty;
// otherwise the run directory is written there.
RunResult run_pipeline(const std::vector<Event>& events, std::string stream_hash,
                       RunMode mode, const HarnessConfig& config,
                       const std::filesystem::path& out_dir = {});

RunResult run_pipeline(const std::filesystem::path& events_path, RunMode mode,
                       const HarnessConfig& config,
                       const std::filesystem::path& out_dir);

// Model parameters shared by both modes for a given stream registry.
ModelParams pipeline_params(const HarnessConfig& config,
                            const FeatureRegistry& registry);

struct RunManifest {
  RunMode mode = RunMode::kRoo;
  std::string stream_hash;
  std::string run_id;
  std::uint64_t samples = 0;
  std::uint64_t impressions = 0;
  std::vector<std::string> blocks;
};

// Throws std::runtime_error when the directory holds no readable manifest.
RunManifest read_manifest(const std::filesystem::path& run_dir);

// The run's joined data as impression samples (roo runs are expanded).
std::vector<ImpressionSample> load_run_impressions(
    const std::filesystem::path& run_dir);

}  // namespace roo

#endif  // ROO_PIPELINE_H_
