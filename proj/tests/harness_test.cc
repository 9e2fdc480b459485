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
#include <filesystem>
#include <fstream>
#include <set>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "roo/audit.h"
#include "roo/config.h"
#include "roo/generator.h"
#include "roo/impression_joiner.h"
#include "roo/jsonl.h"
#include "roo/pipeline.h"
#include "roo/report.h"
#include "roo/store.h"

using namespace roo;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "roo_harness_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

HarnessConfig small_config(std::uint64_t seed) {
  HarnessConfig c = default_config();
  c.generator.seed = seed;
  c.generator.num_users = 30;
  c.generator.requests_per_user = 3;
  c.generator.window_ms = 1000;
  c.generator.history_max = 12;
  c.joiner.window_ms = 1000;
  c.model.n_max = 8;
  c.batch_size = 16;
  c.block_samples = 20;
  return c;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), dir).string()] = read_file_bytes(e.path());
    }
  }
  return out;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string outputs_of(const RunResult& r) {
  std::string s;
  for (const auto& run : r.runs) {
    for (const auto& row : run.outputs) {
      s += std::to_string(row.request_id) + ":" + std::to_string(row.item_id);
      for (float v : row.values) s += " " + std::to_string(v);
      s += "\n";
    }
  }
  return s;
}

}  // namespace

TEST_CASE("generator is deterministic and seed-sensitive") {
  GeneratorConfig g;
  g.num_users = 20;
  g.requests_per_user = 3;
  const auto a = generate_events(g);
  CHECK(a == generate_events(g));
  g.seed += 1;
  CHECK(a != generate_events(g));
  std::set<std::pair<UserId, RequestId>> requests;
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].event_time <= a[i].event_time);
  for (const Event& e : a) CHECK(check_event(e).empty());
}

TEST_CASE("k_fixed=1 yields one impression per request") {
  GeneratorConfig g;
  g.num_users = 50;
  g.requests_per_user = 4;
  g.k_fixed = 1;
  std::map<RequestId, int> per_request;
  for (const Event& e : generate_events(g)) {
    if (e.kind == EventKind::kImpression) ++per_request[e.request_id];
  }
  CHECK(per_request.size() == 200);
  for (const auto& [r, n] : per_request) CHECK(n == 1);
}

TEST_CASE("default k distribution has mean 5.5") {
  GeneratorConfig g;
  g.num_users = 1000;
  g.requests_per_user = 10;
  g.history_max = 0;
  std::map<RequestId, int> per_request;
  for (const Event& e : generate_events(g)) {
    if (e.kind == EventKind::kImpression) ++per_request[e.request_id];
  }
  REQUIRE(per_request.size() == 10'000);
  double sum = 0;
  for (const auto& [r, n] : per_request) {
    CHECK(n >= 4);
    CHECK(n <= 7);
    sum += n;
  }
  CHECK(std::abs(sum / per_request.size() - 5.5) <= 0.1);
}

TEST_CASE("generator validation") {
  GeneratorConfig g;
  g.loss_rate = 1.5;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GeneratorConfig{};
  g.conversion_rates[1] = -0.1;
  CHECK_THROWS_AS(generate_events(g), std::invalid_argument);
  g = GeneratorConfig{};
  g.k_weights.fill(0.0);
  CHECK_THROWS_AS(generate_events(g), std::invalid_argument);
  g = GeneratorConfig{};
  g.history_min = 10;
  g.history_max = 5;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("conversion loss drops only conversions at the declared rate") {
  GeneratorConfig g;
  g.num_users = 500;
  g.requests_per_user = 10;
  g.history_max = 0;
  const auto events = generate_events(g);
  const auto lossy = apply_conversion_loss(events, 0.1, 9);
  std::size_t conv = 0, kept = 0, imps = 0, imps_kept = 0;
  for (const Event& e : events) {
    (e.kind == EventKind::kConversion ? conv : imps)++;
  }
  for (const Event& e : lossy) {
    (e.kind == EventKind::kConversion ? kept : imps_kept)++;
  }
  CHECK(imps == imps_kept);
  const double p = 1.0 - static_cast<double>(kept) / conv;
  CHECK(std::abs(p - 0.1) <= 3 * std::sqrt(0.1 * 0.9 / conv));
  CHECK(apply_conversion_loss(events, 0.0, 9) == events);
  CHECK(lossy == apply_conversion_loss(events, 0.1, 9));
}

TEST_CASE("registry inference matches the generator registry") {
  const HarnessConfig c = small_config(3);
  CHECK(infer_registry(generate_events(c.generator)) == generator_registry(c.generator));
  CHECK(infer_registry({}) == FeatureRegistry{});
  Event a;
  a.user_id = a.request_id = a.item_id = 1;
  a.ro_dense[5] = 1;
  Event b = a;
  b.ro_dense.clear();
  b.nro_dense[5] = 1;
  CHECK_THROWS_AS(infer_registry({a, b}), ValidationError);
}

TEST_CASE("config parses, dumps and round trips") {
  const std::string text =
      "# comment\n"
      "[generator]\nseed = 7\nk_fixed = 3\nconversion_rates = 1:0.5, 4:0.25\n"
      "[joiner]\nwindow_ms = 500\ndynamic_trigger = true\n"
      "[model]\ndim = 8\npooling = mean\narchitectures = two_tower, lsr\n"
      "[batch]\nbatch_size = 64\ntasks = click:1\n"
      "[store]\nblock_samples = 100\n";
  const HarnessConfig c = parse_config(text);
  CHECK(c.generator.seed == 7);
  CHECK(c.generator.k_fixed == 3);
  CHECK(c.generator.conversion_rates == std::map<LabelId, double>{{1, 0.5}, {4, 0.25}});
  CHECK(c.generator.window_ms == 500);
  CHECK(c.joiner.window_ms == 500);
  CHECK(c.joiner.dynamic_trigger);
  CHECK(c.model.dim == 8);
  CHECK(c.model.pooling == SeqPooling::kMeanValid);
  CHECK(c.architectures == std::vector<Architecture>{Architecture::kTwoTower,
                                                    Architecture::kLsr});
  CHECK(c.batch_size == 64);
  REQUIRE(c.batch.tasks.size() == 1);
  CHECK(c.batch.tasks[0].name == "click");
  CHECK(c.block_samples == 100);
  CHECK(dump_config(parse_config(dump_config(c))) == dump_config(c));
  CHECK(dump_config(parse_config(dump_config(default_config()))) ==
        dump_config(default_config()));
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(parse_config("[generator]\nsede = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[generator]\nnum_users = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\npooling = max\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\narchitectures = mlp\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[joiner]\nwindow_ms = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[generator]\nk_weights = 1,2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/roo.ini"), std::runtime_error);
}

TEST_CASE("impression-level joiner buffers each impression for the window") {
  ImpressionJoiner j(100);
  Event imp;
  imp.event_time = 0;
  imp.user_id = 1;
  imp.request_id = 9;
  imp.item_id = 4;
  imp.ro_dense[1] = 2.0f;
  imp.nro_dense[200] = 3.0f;
  Event conv = imp;
  conv.kind = EventKind::kConversion;
  conv.ro_dense.clear();
  conv.nro_dense.clear();
  conv.item_labels = {2};
  conv.event_time = 50;
  j.ingest(imp);
  j.ingest(conv);
  CHECK(j.tick(99).empty());
  const auto out = j.tick(100);
  REQUIRE(out.size() == 1);
  CHECK(out[0].conversions == std::vector<LabelId>{2});
  CHECK(out[0].dense_features == DenseMap{{1, 2.0f}, {200, 3.0f}});
  conv.event_time = 150;
  j.ingest(conv);
  CHECK(j.metrics().late_events_dropped == 1);
  CHECK_THROWS_AS(ImpressionJoiner(0), std::invalid_argument);
}

TEST_CASE("empty streams give empty runs with zeroed reports") {
  const HarnessConfig c = small_config(1);
  const fs::path dir = fresh_dir("empty");
  const RunResult r = run_pipeline({}, sha256_hex(""), RunMode::kRoo, c, dir);
  CHECK(r.request_samples.empty());
  CHECK(r.batches == 0);
  CHECK(read_file_bytes(dir / "outputs.jsonl").empty());
  const auto fp = read_json(dir / "footprint.json");
  CHECK(fp["sample_count"] == 0);
  CHECK(fp["roo_bytes"] == 0);
  CHECK(read_json(dir / "joiner_metrics.json")["samples_published"] == 0);
  CHECK(read_manifest(dir).samples == 0);
  CHECK(load_run_impressions(dir).empty());
}

TEST_CASE("a single-request stream gives identical outputs in both modes") {
  HarnessConfig c = small_config(5);
  c.generator.num_users = 1;
  c.generator.requests_per_user = 1;
  const auto events = generate_events(c.generator);
  const RunResult roo = run_pipeline(events, "h", RunMode::kRoo, c);
  const RunResult imp = run_pipeline(events, "h", RunMode::kImpression, c);
  REQUIRE(roo.request_samples.size() == 1);
  CHECK(roo.runs.size() == 4);
  CHECK(outputs_of(roo) == outputs_of(imp));
  CHECK_FALSE(outputs_of(roo).empty());
}

TEST_CASE("run directories are byte-identical across repeats") {
  const HarnessConfig c = small_config(6);
  const fs::path base = fresh_dir("repeat");
  write_jsonl(base / "events.jsonl", generate_events(c.generator));
  run_pipeline(base / "events.jsonl", RunMode::kRoo, c, base / "a");
  run_pipeline(base / "events.jsonl", RunMode::kRoo, c, base / "b");
  const auto a = dir_contents(base / "a");
  CHECK(a.size() > 6);
  CHECK(a == dir_contents(base / "b"));
  const RunManifest m = read_manifest(base / "a");
  CHECK(m.stream_hash == stream_hash(base / "events.jsonl"));
  CHECK(m.blocks.size() == (m.samples + c.block_samples - 1) / c.block_samples);
  CHECK(read_json(base / "a" / "counters.json")["stream_hash"] == m.stream_hash);
}

TEST_CASE("both modes agree and the audit is clean") {
  const HarnessConfig c = small_config(7);
  const fs::path base = fresh_dir("modes");
  write_jsonl(base / "events.jsonl", generate_events(c.generator));
  const RunResult roo = run_pipeline(base / "events.jsonl", RunMode::kRoo, c, base / "roo");
  const RunResult imp =
      run_pipeline(base / "events.jsonl", RunMode::kImpression, c, base / "imp");
  CHECK(roo.run_id == imp.run_id);
  CHECK(outputs_of(roo) == outputs_of(imp));
  CHECK(read_file_bytes(base / "roo" / "outputs.jsonl") ==
        read_file_bytes(base / "imp" / "outputs.jsonl"));

  const AuditReport a = audit_runs(base / "roo", base / "imp");
  CHECK(a.sample_coverage == 1.0);
  CHECK(a.feature_coverage == 1.0);
  for (const auto& [label, rate] : a.mismatch_rate) CHECK(rate == 0.0);
  CHECK(a.left_samples == a.right_samples);

  const AuditReport self = audit_runs(base / "roo", base / "roo");
  for (const auto& [label, n] : self.mismatched) CHECK(n == 0);

  HarnessConfig other = c;
  other.generator.seed = 8;
  write_jsonl(base / "other.jsonl", generate_events(other.generator));
  run_pipeline(base / "other.jsonl", RunMode::kImpression, other, base / "other");
  CHECK_THROWS_AS(audit_runs(base / "roo", base / "other"), AuditError);
}

TEST_CASE("audit counts triples present on one side only") {
  ImpressionSample a;
  a.request_id = 1;
  a.item_id = 1;
  a.conversions = {1, 2};
  a.dense_features[1] = 1.0f;
  ImpressionSample b = a;
  b.conversions = {1};
  ImpressionSample extra = a;
  extra.item_id = 2;
  const AuditReport r = audit_samples({a, extra}, {b});
  CHECK(r.mismatched.at(1) == 1);
  CHECK(r.observed.at(1) == 2);
  CHECK(r.mismatch_rate.at(1) == doctest::Approx(0.5));
  CHECK(r.mismatch_rate.at(2) == 1.0);
  CHECK(r.sample_coverage == doctest::Approx(0.5));
  const AuditReport none = audit_samples({}, {});
  CHECK(none.sample_coverage == 1.0);
  CHECK(none.mismatch_rate.empty());
}

TEST_CASE("conversion loss shows up as the declared mismatch rate") {
  HarnessConfig c = small_config(9);
  c.generator.num_users = 400;
  c.generator.requests_per_user = 10;
  c.generator.history_max = 0;
  c.generator.loss_rate = 0.01;
  c.architectures = {Architecture::kTwoTower};
  const auto events = generate_events(c.generator);
  const RunResult roo = run_pipeline(events, "h", RunMode::kRoo, c);
  const RunResult imp = run_pipeline(events, "h", RunMode::kImpression, c);
  std::vector<ImpressionSample> left;
  for (const auto& s : roo.request_samples) {
    for (auto& i : expand_request_sample(s)) left.push_back(std::move(i));
  }
  const AuditReport a = audit_samples(left, imp.impression_samples);
  CHECK(a.sample_coverage == 1.0);
  for (const auto& [label, rate] : a.mismatch_rate) {
    const double n = static_cast<double>(a.observed.at(label));
    CHECK(std::abs(rate - 0.01) <= 3 * std::sqrt(0.01 * 0.99 / n));
  }
}

TEST_CASE("architectures needing history are skipped without it") {
  HarnessConfig c = small_config(10);
  c.generator.history_max = 0;
  const RunResult r = run_pipeline(generate_events(c.generator), "h", RunMode::kRoo, c);
  CHECK(r.runs.size() == 2);
  CHECK(r.skipped == std::vector<Architecture>{Architecture::kRetrieval,
                                               Architecture::kRankingEncoder});
}

TEST_CASE("report marks missing sections absent") {
  const HarnessConfig c = small_config(11);
  const fs::path base = fresh_dir("report");
  write_jsonl(base / "events.jsonl", generate_events(c.generator));
  run_pipeline(base / "events.jsonl", RunMode::kRoo, c, base / "roo");
  const Report r = build_report({base / "roo"});
  const auto j = nlohmann::json::parse(r.json);
  CHECK(j["audit"]["status"] == "absent");
  CHECK(j["cost"]["status"] == "absent");
  CHECK(j["footprint"]["sample_count"] == read_manifest(base / "roo").samples);
  CHECK(r.table.find("audit.status") != std::string::npos);
  CHECK(build_report({base / "roo"}).json == r.json);
  CHECK_THROWS_AS(build_report({base / "nope"}), std::runtime_error);
  CHECK_THROWS_AS(build_report({base}), std::runtime_error);
}

TEST_CASE("run modes parse by name") {
  CHECK(parse_run_mode("roo") == RunMode::kRoo);
  CHECK(parse_run_mode("impression") == RunMode::kImpression);
  CHECK_FALSE(parse_run_mode("both").has_value());
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
