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


#include "roo/cost.h"

#include <limits>
#include <stdexcept>

#include "json_util.h"

namespace roo {
namespace {

using internal::ReportJson;
__extension__ typedef unsigned __int128 u128;

std::uint64_t checked(u128 v, const char* what) {
  if (v > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error(std::string(what) + " does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(v);
}

// n^2 d + n d^2 in 128 bits; the inputs are at most 2^64 each, so this can
// itself wrap only for absurd sizes, which the guard below rejects.
u128 attention_cost(u128 n, u128 d, const char* what) {
  const u128 limit = u128{1} << 40;
  if (n > limit || d > limit) {
    throw std::overflow_error(std::string(what) + " arguments too large");
  }
  return n * n * d + n * d * d;
}

}  // namespace

std::uint64_t impression_seq_cost(std::uint64_t n, std::uint64_t m,
                                  std::uint64_t d) {
  const u128 per = attention_cost(n, d, "impression_seq_cost");
  if (m != 0 && per > (~u128{0}) / m) {
    throw std::overflow_error("impression_seq_cost overflows");
  }
  return checked(per * m, "impression_seq_cost");
}

std::uint64_t roo_seq_cost(std::uint64_t n, std::uint64_t m, std::uint64_t d) {
  return checked(attention_cost(u128{n} + m, d, "roo_seq_cost"), "roo_seq_cost");
}

double seq_savings_ratio(std::uint64_t n, std::uint64_t m, std::uint64_t d) {
  const std::uint64_t roo = roo_seq_cost(n, m, d);
  if (roo == 0) throw std::domain_error("seq_savings_ratio: roo cost is zero");
  return static_cast<double>(impression_seq_cost(n, m, d)) /
         static_cast<double>(roo);
}

double dedup_ratio(const JaggedBatch& batch) {
  if (batch.b_ro == 0) throw std::invalid_argument("dedup_ratio: empty batch");
  return static_cast<double>(batch.b_nro) / static_cast<double>(batch.b_ro);
}

std::uint64_t CostReport::total_rows_roo() const {
  std::uint64_t t = 0;
  for (const auto& [f, n] : rows_fetched_roo) t += n;
  return t;
}

std::uint64_t CostReport::total_rows_impression() const {
  std::uint64_t t = 0;
  for (const auto& [f, n] : rows_fetched_impression) t += n;
  return t;
}

CostReport measure_run(const RunCounters& roo, const RunCounters& impression) {
  if (roo.run_id != impression.run_id) {
    throw std::invalid_argument("measure_run: run ids differ ('" + roo.run_id +
                                "' vs '" + impression.run_id + "')");
  }
  if (roo.counters.b_nro != impression.counters.b_nro) {
    throw std::invalid_argument(
        "measure_run: runs saw different impression counts (" +
        std::to_string(roo.counters.b_nro) + " vs " +
        std::to_string(impression.counters.b_nro) + ")");
  }
  CostReport r;
  r.run_id = roo.run_id;
  r.roo_flops = roo.counters.ro_flops + roo.counters.nro_flops;
  r.impression_flops = impression.counters.ro_flops + impression.counters.nro_flops;
  r.savings_ratio = r.roo_flops == 0 ? 0.0
                                     : static_cast<double>(r.impression_flops) /
                                           static_cast<double>(r.roo_flops);
  r.rows_fetched_roo = roo.counters.rows_fetched;
  r.rows_fetched_impression = impression.counters.rows_fetched;
  for (const auto& [f, b] : roo.counters.bytes_moved) r.bytes_comm_roo += b;
  for (const auto& [f, b] : impression.counters.bytes_moved) {
    r.bytes_comm_impression += b;
  }
  r.b_ro = roo.counters.b_ro;
  r.b_nro = roo.counters.b_nro;
  return r;
}

std::string cost_report_to_json(const CostReport& r) {
  ReportJson j;
  j["run_id"] = r.run_id;
  j["b_ro"] = r.b_ro;
  j["b_nro"] = r.b_nro;
  j["impression_flops"] = r.impression_flops;
  j["roo_flops"] = r.roo_flops;
  j["savings_ratio"] = internal::round_significant(r.savings_ratio);
  j["rows_fetched_roo"] = internal::keyed(r.rows_fetched_roo);
  j["rows_fetched_impression"] = internal::keyed(r.rows_fetched_impression);
  j["bytes_comm_roo"] = r.bytes_comm_roo;
  j["bytes_comm_impression"] = r.bytes_comm_impression;
  return j.dump(2);
}

CostReport cost_report_from_json(const std::string& text) {
  const ReportJson j = ReportJson::parse(text);
  CostReport r;
  r.run_id = j.at("run_id").get<std::string>();
  r.b_ro = j.at("b_ro").get<std::uint64_t>();
  r.b_nro = j.at("b_nro").get<std::uint64_t>();
  r.impression_flops = j.at("impression_flops").get<std::uint64_t>();
  r.roo_flops = j.at("roo_flops").get<std::uint64_t>();
  r.savings_ratio = j.at("savings_ratio").get<double>();
  r.rows_fetched_roo = internal::unkeyed<std::uint64_t>(j.at("rows_fetched_roo"));
  r.rows_fetched_impression =
      internal::unkeyed<std::uint64_t>(j.at("rows_fetched_impression"));
  r.bytes_comm_roo = j.at("bytes_comm_roo").get<std::uint64_t>();
  r.bytes_comm_impression = j.at("bytes_comm_impression").get<std::uint64_t>();
  return r;
}

std::string counters_to_json(const ForwardCounters& c) {
  ReportJson j;
  j["b_ro"] = c.b_ro;
  j["b_nro"] = c.b_nro;
  j["ro_flops"] = c.ro_flops;
  j["nro_flops"] = c.nro_flops;
  j["rows_fetched"] = internal::keyed(c.rows_fetched);
  j["bytes_moved"] = internal::keyed(c.bytes_moved);
  j["target_item_rows"] = c.target_item_rows;
  j["empty_history_rows"] = c.empty_history_rows;
  return j.dump(2);
}

ForwardCounters counters_from_json(const std::string& text) {
  const ReportJson j = ReportJson::parse(text);
  ForwardCounters c;
  c.b_ro = j.at("b_ro").get<std::uint64_t>();
  c.b_nro = j.at("b_nro").get<std::uint64_t>();
  c.ro_flops = j.at("ro_flops").get<std::uint64_t>();
  c.nro_flops = j.at("nro_flops").get<std::uint64_t>();
  c.rows_fetched = internal::unkeyed<std::uint64_t>(j.at("rows_fetched"));
  c.bytes_moved = internal::unkeyed<std::uint64_t>(j.at("bytes_moved"));
  c.target_item_rows = j.at("target_item_rows").get<std::uint64_t>();
  c.empty_history_rows = j.at("empty_history_rows").get<std::uint64_t>();
  return c;
}

}  // namespace roo
