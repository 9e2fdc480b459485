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


#include "roo/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json_util.h"
#include "roo/batcher.h"
#include "roo/cost.h"
#include "roo/jsonl.h"

namespace roo {
namespace {

using internal::ReportJson;

void write_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string block_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "block-%05zu.roo", i);
  return buf;
}

bool needs_history(Architecture a) {
  return a == Architecture::kRetrieval || a == Architecture::kRankingEncoder;
}

void collect_outputs(const JaggedBatch& batch, const Matrix& values,
                     std::vector<OutputRow>* rows) {
  const FanoutIndex f = fanout(batch);
  for (std::size_t j = 0; j < batch.b_nro; ++j) {
    auto v = values.row(j);
    rows->push_back({batch.request_ids[f.row_map[j]], batch.items[j],
                     std::vector<float>(v.begin(), v.end())});
  }
}

template <typename Sample, typename Build>
void run_batches(const std::vector<Sample>& samples, const ModelParams& params,
                 const HarnessConfig& config, Build build, RunResult* result) {
  for (Architecture a : config.architectures) {
    if (needs_history(a) && !params.has_history()) {
      result->skipped.push_back(a);
    } else {
      result->runs.push_back({a, {}, {}});
    }
  }
  for (std::size_t begin = 0; begin < samples.size(); begin += config.batch_size) {
    const std::size_t end = std::min(samples.size(), begin + config.batch_size);
    const std::vector<Sample> chunk(samples.begin() + begin, samples.begin() + end);
    const JaggedBatch batch = build(chunk, params.registry, config.batch);
    ++result->batches;
    for (ArchitectureRun& run : result->runs) {
      ForwardOutput out = run_forward(params, batch, run.arch);
      run.counters.merge(out.counters);
      collect_outputs(batch, out.values, &run.outputs);
    }
  }
  for (ArchitectureRun& run : result->runs) {
    std::sort(run.outputs.begin(), run.outputs.end(),
              [](const OutputRow& a, const OutputRow& b) {
                return std::tie(a.request_id, a.item_id) <
                       std::tie(b.request_id, b.item_id);
              });
  }
}

ReportJson joiner_metrics_json(const RunResult& r) {
  ReportJson j;
  if (r.mode == RunMode::kRoo) {
    const JoinerMetrics& m = r.joiner_metrics;
    j["events_ingested"] = m.events_ingested;
    j["samples_published"] = m.samples_published;
    j["late_events_dropped"] = m.late_events_dropped;
    j["orphan_conversions"] = m.orphan_conversions;
    ReportJson closes = ReportJson::object();
    const std::pair<CloseReason, const char*> names[] = {
        {CloseReason::kNewRequest, "new_request"},
        {CloseReason::kEngagementThreshold, "engagement_threshold"},
        {CloseReason::kDynamicTrigger, "dynamic_trigger"},
        {CloseReason::kWindowTimeUp, "window_time_up"},
        {CloseReason::kDrain, "drain"}};
    for (const auto& [reason, name] : names) {
      auto it = m.closes_by_reason.find(reason);
      closes[name] = it == m.closes_by_reason.end() ? 0 : it->second;
    }
    j["closes_by_reason"] = closes;
    j["mean_close_latency_ms"] = internal::round_significant(m.mean_close_latency_ms);
    j["mean_intra_request_gap_ms"] =
        internal::round_significant(m.mean_intra_request_gap_ms);
    j["mean_landing_latency_ms"] =
        internal::round_significant(m.mean_landing_latency_ms);
  } else {
    const ImpressionJoinerMetrics& m = r.impression_joiner_metrics;
    j["events_ingested"] = m.events_ingested;
    j["samples_published"] = m.samples_published;
    j["late_events_dropped"] = m.late_events_dropped;
  }
  return j;
}

ReportJson footprint_json(const FootprintReport& f) {
  ReportJson j;
  j["sample_count"] = f.sample_count;
  j["impression_count"] = f.impression_count;
  j["roo_bytes"] = f.roo_bytes;
  j["impression_bytes"] = f.impression_bytes;
  j["ro_byte_share"] = internal::round_significant(f.ro_byte_share);
  j["mean_impressions_per_request"] =
      internal::round_significant(f.mean_impressions_per_request);
  j["implied_volume_increase"] =
      internal::round_significant(f.implied_volume_increase);
  return j;
}

void write_run_dir(const RunResult& r, const HarnessConfig& config,
                   const std::filesystem::path& dir) {
  ReportJson manifest;
  manifest["mode"] = to_string(r.mode);
  manifest["stream_hash"] = r.stream_hash;
  manifest["run_id"] = r.run_id;
  manifest["samples"] = r.mode == RunMode::kRoo ? r.request_samples.size()
                                                : r.impression_samples.size();
  manifest["impressions"] = r.footprint.impression_count;
  manifest["batches"] = r.batches;
  manifest["blocks"] = r.blocks;
  ReportJson archs = ReportJson::array();
  for (const ArchitectureRun& run : r.runs) archs.push_back(to_string(run.arch));
  manifest["architectures"] = archs;
  ReportJson skipped = ReportJson::array();
  for (Architecture a : r.skipped) skipped.push_back(to_string(a));
  manifest["skipped_architectures"] = skipped;
  internal::write_json_file(dir / "manifest.json", manifest);

  write_bytes(dir / "config.ini", dump_config(config));
  internal::write_json_file(dir / "joiner_metrics.json", joiner_metrics_json(r));
  internal::write_json_file(dir / "footprint.json", footprint_json(r.footprint));

  ReportJson counters;
  counters["run_id"] = r.run_id;
  counters["stream_hash"] = r.stream_hash;
  ReportJson per_arch = ReportJson::object();
  for (const ArchitectureRun& run : r.runs) {
    per_arch[to_string(run.arch)] = ReportJson::parse(counters_to_json(run.counters));
  }
  counters["architectures"] = per_arch;
  internal::write_json_file(dir / "counters.json", counters);

  std::string lines;
  for (const ArchitectureRun& run : r.runs) {
    for (const OutputRow& row : run.outputs) {
      nlohmann::basic_json<nlohmann::ordered_map, std::vector, std::string, bool,
                           std::int64_t, std::uint64_t, float>
          j;
      j["arch"] = to_string(run.arch);
      j["request_id"] = row.request_id;
      j["item_id"] = row.item_id;
      j["values"] = row.values;
      lines += j.dump();
      lines += '\n';
    }
  }
  write_bytes(dir / "outputs.jsonl", lines);
}

}  // namespace

const char* to_string(RunMode mode) {
  return mode == RunMode::kRoo ? "roo" : "impression";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
  if (name == "roo") return RunMode::kRoo;
  if (name == "impression") return RunMode::kImpression;
  return std::nullopt;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string stream_hash(const std::filesystem::path& events_path) {
  return sha256_hex(read_file_bytes(events_path));
}

ModelParams pipeline_params(const HarnessConfig& config,
                            const FeatureRegistry& registry) {
  ModelConfig model = config.model;
  const bool history = model.history_items && registry.contains(*model.history_items);
  if (!history) {
    model.history_items.reset();
    model.history_actions.reset();
    model.history_contexts.reset();
  } else {
    if (model.history_actions && !registry.contains(*model.history_actions)) {
      model.history_actions.reset();
    }
    if (model.history_contexts && !registry.contains(*model.history_contexts)) {
      model.history_contexts.reset();
    }
  }
  model.tasks.clear();
  for (const TaskSpec& t : config.batch.tasks) model.tasks.push_back(t.name);
  return init_params(model, registry);
}

RunResult run_pipeline(const std::vector<Event>& events, std::string hash,
                       RunMode mode, const HarnessConfig& config,
                       const std::filesystem::path& out_dir) {
  config.validate();
  RunResult r;
  r.mode = mode;
  r.stream_hash = std::move(hash);
  r.run_id = sha256_hex(r.stream_hash + "\n" + dump_config(config)).substr(0, 16);
  r.registry = infer_registry(events);

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir / "blocks");
  auto store_block = [&](const std::string& bytes) {
    const std::string name = block_name(r.blocks.size());
    if (!out_dir.empty()) write_bytes(out_dir / "blocks" / name, bytes);
    r.blocks.push_back("blocks/" + name);
  };

  if (mode == RunMode::kRoo) {
    const std::vector<Event> ingested = apply_conversion_loss(
        events, config.generator.loss_rate, config.generator.seed);
    std::vector<RequestSample> joined =
        config.joiner_shards > 1
            ? join_stream_sharded(ingested, config.joiner, config.joiner_shards)
            : join_stream(ingested, config.joiner, &r.joiner_metrics);
    for (std::size_t b = 0; b < joined.size(); b += config.block_samples) {
      const std::vector<RequestSample> chunk(
          joined.begin() + b,
          joined.begin() + std::min(joined.size(), b + config.block_samples));
      const std::string bytes = encode_request_block(chunk);
      store_block(bytes);
      for (auto& s : decode_request_block(bytes)) r.request_samples.push_back(std::move(s));
    }
    if (!r.request_samples.empty()) {
      r.footprint = measure_footprint(r.request_samples);
    }
  } else {
    std::vector<ImpressionSample> joined = join_impressions(
        events, config.joiner.window_ms, &r.impression_joiner_metrics);
    for (std::size_t b = 0; b < joined.size(); b += config.block_samples) {
      const std::vector<ImpressionSample> chunk(
          joined.begin() + b,
          joined.begin() + std::min(joined.size(), b + config.block_samples));
      const std::string bytes = encode_impression_block(chunk);
      store_block(bytes);
      for (auto& s : decode_impression_block(bytes)) {
        r.impression_samples.push_back(std::move(s));
      }
    }
    if (!r.impression_samples.empty()) {
      r.footprint =
          measure_footprint(group_impressions(r.impression_samples, r.registry));
    }
  }

  if (!r.registry.ro_dense().empty() || !r.registry.ro_idlist().empty()) {
    const ModelParams params = pipeline_params(config, r.registry);
    if (mode == RunMode::kRoo) {
      run_batches(r.request_samples, params, config, build_batch, &r);
    } else {
      run_batches(r.impression_samples, params, config, build_impression_batch, &r);
    }
  }
  if (!out_dir.empty()) write_run_dir(r, config, out_dir);
  return r;
}

RunResult run_pipeline(const std::filesystem::path& events_path, RunMode mode,
                       const HarnessConfig& config,
                       const std::filesystem::path& out_dir) {
  return run_pipeline(read_events(events_path), stream_hash(events_path), mode,
                      config, out_dir);
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
  const ReportJson j = internal::read_json_file(run_dir / "manifest.json");
  RunManifest m;
  try {
    auto mode = parse_run_mode(j.at("mode").get<std::string>());
    if (!mode) throw std::runtime_error("bad mode");
    m.mode = *mode;
    m.stream_hash = j.at("stream_hash").get<std::string>();
    m.run_id = j.at("run_id").get<std::string>();
    m.samples = j.at("samples").get<std::uint64_t>();
    m.impressions = j.at("impressions").get<std::uint64_t>();
    m.blocks = j.at("blocks").get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed manifest in " + run_dir.string() + ": " +
                             e.what());
  }
  return m;
}

std::vector<ImpressionSample> load_run_impressions(
    const std::filesystem::path& run_dir) {
  const RunManifest m = read_manifest(run_dir);
  std::vector<ImpressionSample> out;
  for (const std::string& name : m.blocks) {
    const std::string bytes = read_file_bytes(run_dir / name);
    if (block_layout(bytes) == BlockLayout::kImpression) {
      for (auto& s : decode_impression_block(bytes)) out.push_back(std::move(s));
    } else {
      for (const RequestSample& s : decode_request_block(bytes)) {
        for (auto& imp : expand_request_sample(s)) out.push_back(std::move(imp));
      }
    }
  }
  return out;
}

}  // namespace roo
