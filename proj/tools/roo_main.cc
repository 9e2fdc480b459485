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


// roo: command line front end for the request-level training data pipeline.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roo/audit.h"
#include "roo/batcher.h"
#include "roo/config.h"
#include "roo/cost.h"
#include "roo/generator.h"
#include "roo/impression_joiner.h"
#include "roo/joiner.h"
#include "roo/jsonl.h"
#include "roo/pipeline.h"
#include "roo/report.h"
#include "roo/schema.h"
#include "roo/store.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string mode = "roo";
  std::string out;
};

roo::HarnessConfig load(const Common& c) {
  roo::HarnessConfig cfg =
      c.config_path.empty() ? roo::default_config() : roo::load_config(c.config_path);
  if (c.seed) {
    cfg.generator.seed = *c.seed;
    cfg.model.seed = *c.seed;
  }
  cfg.validate();
  return cfg;
}

roo::RunMode mode_of(const Common& c) {
  auto m = roo::parse_run_mode(c.mode);
  if (!m) throw std::invalid_argument("--mode must be roo or impression");
  return *m;
}

fs::path out_dir(const Common& c) {
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Emits `j` on stdout and, when --out is given, into <out>/<name>.
void emit(const Common& c, const Json& j, const char* name) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!c.out.empty()) write_text(out_dir(c) / name, text);
}

bool is_block(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string(magic, 4) == "ROO1";
}

std::vector<roo::RequestSample> load_request_samples(const fs::path& p) {
  if (!is_block(p)) return roo::read_request_samples(p);
  if (roo::block_layout(roo::read_file_bytes(p)) != roo::BlockLayout::kRequest) {
    throw roo::StoreError(roo::StoreErrc::kWrongLayout,
                          p.string() + " is an impression-layout block");
  }
  return roo::read_block(p);
}

std::vector<roo::ImpressionSample> load_impression_samples(const fs::path& p) {
  if (!is_block(p)) return roo::read_impression_samples(p);
  return roo::read_impression_block(p);
}

Json parse_json(const std::string& s) { return Json::parse(s); }

roo::FeatureRegistry registry_of(const std::vector<roo::RequestSample>& samples) {
  roo::FeatureRegistry r;
  if (samples.empty()) return r;
  const roo::RequestSample& s = samples.front();
  for (const auto& [id, v] : s.ro_dense) r.add(roo::FeatureKind::kRoDense, id);
  for (const auto& [id, v] : s.ro_idlist) r.add(roo::FeatureKind::kRoIdList, id);
  for (const auto& [id, v] : s.nro_dense) r.add(roo::FeatureKind::kNroDense, id);
  for (const auto& [id, v] : s.nro_idlist) r.add(roo::FeatureKind::kNroIdList, id);
  return r;
}

Json footprint_json(const roo::FootprintReport& f) {
  Json j;
  j["sample_count"] = f.sample_count;
  j["impression_count"] = f.impression_count;
  j["roo_bytes"] = f.roo_bytes;
  j["impression_bytes"] = f.impression_bytes;
  j["ro_byte_share"] = f.ro_byte_share;
  j["mean_impressions_per_request"] = f.mean_impressions_per_request;
  j["implied_volume_increase"] = f.implied_volume_increase;
  return j;
}

int cmd_generate(const Common& c) {
  const roo::HarnessConfig cfg = load(c);
  const std::vector<roo::Event> events = roo::generate_events(cfg.generator);
  const fs::path path = out_dir(c) / "events.jsonl";
  roo::write_jsonl(path, events);
  Json j;
  j["events"] = events.size();
  j["path"] = path.string();
  j["stream_hash"] = roo::stream_hash(path);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_join(const Common& c, const std::string& events_path) {
  const roo::HarnessConfig cfg = load(c);
  const std::vector<roo::Event> events = roo::read_events(events_path);
  const fs::path dir = out_dir(c);
  Json j;
  if (mode_of(c) == roo::RunMode::kRoo) {
    roo::JoinerMetrics m;
    const auto samples = roo::join_stream(
        roo::apply_conversion_loss(events, cfg.generator.loss_rate, cfg.generator.seed),
        cfg.joiner, &m);
    roo::write_jsonl(dir / "samples.jsonl", samples);
    j["samples_published"] = m.samples_published;
    j["late_events_dropped"] = m.late_events_dropped;
    j["orphan_conversions"] = m.orphan_conversions;
    j["mean_close_latency_ms"] = m.mean_close_latency_ms;
    j["mean_intra_request_gap_ms"] = m.mean_intra_request_gap_ms;
    j["mean_landing_latency_ms"] = m.mean_landing_latency_ms;
  } else {
    roo::ImpressionJoinerMetrics m;
    const auto samples = roo::join_impressions(events, cfg.joiner.window_ms, &m);
    roo::write_jsonl(dir / "samples.jsonl", samples);
    j["samples_published"] = m.samples_published;
    j["late_events_dropped"] = m.late_events_dropped;
  }
  j["path"] = (dir / "samples.jsonl").string();
  write_text(dir / "joiner_metrics.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_pack(const Common& c, const std::string& samples_path) {
  const fs::path path = out_dir(c) / "block.roo";
  roo::WriteSummary w;
  if (mode_of(c) == roo::RunMode::kRoo) {
    w = roo::write_block(roo::read_request_samples(samples_path), path);
  } else {
    w = roo::write_impression_block(roo::read_impression_samples(samples_path), path);
  }
  Json j;
  j["path"] = path.string();
  j["samples"] = w.sample_count;
  j["bytes"] = w.bytes_written;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_expand(const Common& c, const std::string& block_path) {
  roo::IOReport io;
  const auto impressions = roo::expand_block(block_path, &io);
  const fs::path dir = out_dir(c);
  roo::write_jsonl(dir / "impressions.jsonl", impressions);
  Json j;
  j["path"] = (dir / "impressions.jsonl").string();
  j["samples_read"] = io.samples_read;
  j["impressions_emitted"] = io.impressions_emitted;
  j["roo_io_bytes"] = io.roo_io_bytes;
  j["impression_io_bytes"] = io.impression_io_bytes;
  write_text(dir / "io_report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_batch(const Common& c, const std::string& samples_path) {
  const roo::HarnessConfig cfg = load(c);
  const fs::path dir = out_dir(c);
  std::ofstream out(dir / "batches.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write batches.jsonl");
  std::uint64_t batches = 0, b_ro = 0, b_nro = 0;
  auto write = [&](const roo::JaggedBatch& b) {
    out << roo::batch_to_json(b) << "\n";
    ++batches;
    b_ro += b.b_ro;
    b_nro += b.b_nro;
  };
  if (mode_of(c) == roo::RunMode::kRoo) {
    const auto samples = load_request_samples(samples_path);
    const roo::FeatureRegistry reg = registry_of(samples);
    for (std::size_t i = 0; i < samples.size(); i += cfg.batch_size) {
      std::vector<roo::RequestSample> chunk(
          samples.begin() + i,
          samples.begin() + std::min(samples.size(), i + cfg.batch_size));
      write(roo::build_batch(chunk, reg, cfg.batch));
    }
  } else {
    const auto samples = load_impression_samples(samples_path);
    if (!samples.empty()) {
      // Request-only features cannot be told apart in impression samples;
      // they are batched as item-side.
      roo::FeatureRegistry reg;
      for (const auto& [id, v] : samples.front().dense_features) {
        reg.add(roo::FeatureKind::kNroDense, id);
      }
      for (const auto& [id, v] : samples.front().idlist_features) {
        reg.add(roo::FeatureKind::kNroIdList, id);
      }
      for (std::size_t i = 0; i < samples.size(); i += cfg.batch_size) {
        std::vector<roo::ImpressionSample> chunk(
            samples.begin() + i,
            samples.begin() + std::min(samples.size(), i + cfg.batch_size));
        write(roo::build_impression_batch(chunk, reg, cfg.batch));
      }
    }
  }
  Json j;
  j["path"] = (dir / "batches.jsonl").string();
  j["batches"] = batches;
  j["b_ro"] = b_ro;
  j["b_nro"] = b_nro;
  j["dedup_ratio"] = b_ro == 0 ? 0.0 : static_cast<double>(b_nro) / b_ro;
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_forward(const Common& c, const std::string& events_path) {
  const roo::HarnessConfig cfg = load(c);
  const fs::path dir = out_dir(c);
  const roo::RunResult r = roo::run_pipeline(events_path, mode_of(c), cfg, dir);
  std::cout << roo::read_file_bytes(dir / "manifest.json");
  (void)r;
  return kExitOk;
}

std::optional<std::uint64_t> as_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

Json cost_between_runs(const fs::path& roo_dir, const fs::path& imp_dir) {
  const Json a = Json::parse(roo::read_file_bytes(roo_dir / "counters.json"));
  const Json b = Json::parse(roo::read_file_bytes(imp_dir / "counters.json"));
  Json out;
  out["run_id"] = a.at("run_id");
  Json per = Json::object();
  roo::RunCounters total_a{a.at("run_id").get<std::string>(), {}};
  roo::RunCounters total_b{b.at("run_id").get<std::string>(), {}};
  for (const auto& [arch, counters] : a.at("architectures").items()) {
    if (!b.at("architectures").contains(arch)) continue;
    roo::RunCounters ra{total_a.run_id, roo::counters_from_json(counters.dump())};
    roo::RunCounters rb{total_b.run_id,
                        roo::counters_from_json(b["architectures"][arch].dump())};
    per[arch] = parse_json(roo::cost_report_to_json(roo::measure_run(ra, rb)));
  }
  out["architectures"] = per;
  return out;
}

int cmd_cost(const Common& c, const std::vector<std::string>& args,
             const std::vector<std::string>& runs, const std::string& corpus) {
  Json j;
  if (!runs.empty()) {
    if (runs.size() != 2) throw std::invalid_argument("--runs takes ROO_DIR IMPRESSION_DIR");
    j = cost_between_runs(runs[0], runs[1]);
  } else if (!corpus.empty()) {
    const auto samples = load_request_samples(corpus);
    if (samples.empty()) throw std::invalid_argument("corpus is empty");
    const roo::FeatureRegistry reg = registry_of(samples);
    const roo::JaggedBatch b =
        roo::build_batch(samples, reg, roo::default_batch_config());
    j["b_ro"] = b.b_ro;
    j["b_nro"] = b.b_nro;
    j["dedup_ratio"] = roo::dedup_ratio(b);
  } else {
    if (args.size() != 3) {
      throw std::invalid_argument("cost takes N M D, --runs or --corpus");
    }
    std::uint64_t v[3];
    for (int i = 0; i < 3; ++i) {
      auto x = as_uint(args[i]);
      if (!x) throw std::invalid_argument("cost: '" + args[i] + "' is not an integer");
      v[i] = *x;
    }
    j["n"] = v[0];
    j["m"] = v[1];
    j["d"] = v[2];
    j["impression_flops"] = roo::impression_seq_cost(v[0], v[1], v[2]);
    j["roo_flops"] = roo::roo_seq_cost(v[0], v[1], v[2]);
    j["savings_ratio"] = roo::seq_savings_ratio(v[0], v[1], v[2]);
  }
  emit(c, j, "cost.json");
  return kExitOk;
}

int cmd_footprint(const Common& c, const std::string& samples_path) {
  emit(c, footprint_json(roo::measure_footprint(load_request_samples(samples_path))),
       "footprint.json");
  return kExitOk;
}

int cmd_audit(const Common& c, const std::vector<std::string>& runs) {
  if (runs.size() != 2) throw std::invalid_argument("audit takes two run directories");
  emit(c, parse_json(roo::audit_to_json(roo::audit_runs(runs[0], runs[1]))),
       "audit.json");
  return kExitOk;
}

int cmd_report(const Common& c, const std::vector<std::string>& dirs) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  const roo::Report r = roo::build_report(paths);
  std::cout << r.table;
  if (!c.out.empty()) {
    const fs::path dir = out_dir(c);
    write_text(dir / "report.json", r.json);
    write_text(dir / "report.txt", r.table);
  }
  return kExitOk;
}

// generate -> both pipelines -> cost -> audit -> report under --out.
int cmd_run(const Common& c) {
  const roo::HarnessConfig cfg = load(c);
  const fs::path dir = out_dir(c);
  const fs::path events = dir / "events.jsonl";
  roo::write_jsonl(events, roo::generate_events(cfg.generator));
  roo::run_pipeline(events, roo::RunMode::kRoo, cfg, dir / "roo");
  roo::run_pipeline(events, roo::RunMode::kImpression, cfg, dir / "impression");
  write_text(dir / "roo" / "cost.json",
             cost_between_runs(dir / "roo", dir / "impression").dump(2) + "\n");
  write_text(dir / "roo" / "audit.json",
             roo::audit_to_json(roo::audit_runs(dir / "roo", dir / "impression")) + "\n");
  const roo::Report r = roo::build_report({dir / "roo", dir / "impression"});
  write_text(dir / "report.json", r.json);
  write_text(dir / "report.txt", r.table);
  std::cout << r.table;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Request-level training data pipeline"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, bool with_mode) {
    sub->add_option("--seed", common.seed, "Overrides generator and model seeds");
    sub->add_option("--config", common.config_path, "INI configuration file");
    sub->add_option("--out", common.out, "Output directory");
    if (with_mode) {
      sub->add_option("--mode", common.mode, "roo or impression")
          ->check(CLI::IsMember({"roo", "impression"}));
    }
  };

  std::string input;
  std::vector<std::string> inputs;
  std::vector<std::string> runs;
  std::string corpus;

  auto* generate = app.add_subcommand("generate", "Write a synthetic event stream");
  add_common(generate, false);
  auto* join = app.add_subcommand("join", "Join an event stream into samples");
  add_common(join, true);
  join->add_option("events", input, "events.jsonl")->required();
  auto* pack = app.add_subcommand("pack", "Write samples into a columnar block");
  add_common(pack, true);
  pack->add_option("samples", input, "samples.jsonl")->required();
  auto* expand = app.add_subcommand("expand", "Expand a request block to impressions");
  add_common(expand, false);
  expand->add_option("block", input, "block file")->required();
  auto* batch = app.add_subcommand("batch", "Build jagged batches from samples");
  add_common(batch, true);
  batch->add_option("samples", input, "samples.jsonl or block")->required();
  auto* forward = app.add_subcommand("forward", "Run the full pipeline on a stream");
  add_common(forward, true);
  forward->add_option("events", input, "events.jsonl")->required();
  auto* cost = app.add_subcommand("cost", "Cost formulas and measured cost reports");
  add_common(cost, false);
  cost->add_option("nmd", inputs, "N M D");
  cost->add_option("--runs", runs, "ROO_RUN IMPRESSION_RUN")->expected(2);
  cost->add_option("--corpus", corpus, "Request samples (jsonl or block)");
  auto* footprint = app.add_subcommand("footprint", "Storage footprint of samples");
  add_common(footprint, false);
  footprint->add_option("samples", input, "samples.jsonl or block")->required();
  auto* audit = app.add_subcommand("audit", "Join quality audit of two runs");
  add_common(audit, false);
  audit->add_option("runs", inputs, "RUN_A RUN_B")->expected(2)->required();
  auto* report = app.add_subcommand("report", "Consolidated report of run directories");
  add_common(report, false);
  report->add_option("dirs", inputs, "run directories")->required();
  auto* run = app.add_subcommand("run", "generate, forward in both modes, audit, report");
  add_common(run, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*generate) return cmd_generate(common);
    if (*join) return cmd_join(common, input);
    if (*pack) return cmd_pack(common, input);
    if (*expand) return cmd_expand(common, input);
    if (*batch) return cmd_batch(common, input);
    if (*forward) return cmd_forward(common, input);
    if (*cost) return cmd_cost(common, inputs, runs, corpus);
    if (*footprint) return cmd_footprint(common, input);
    if (*audit) return cmd_audit(common, inputs);
    if (*report) return cmd_report(common, inputs);
    if (*run) return cmd_run(common);
  } catch (const roo::StoreError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == roo::StoreErrc::kIo ? kExitIo : kExitInvalid;
  } catch (const roo::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const roo::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::overflow_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitInvalid;
}
