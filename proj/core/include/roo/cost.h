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

#ifndef ROO_COST_H_
#define ROO_COST_H_

#include <cstdint>
#include <map>
#include <string>

#include "roo/batcher.h"
#include "roo/model.h"

namespace roo {

// Attention-encoder FLOPs for one request with n history tokens, m targets
// and width d. Softmax and normalisation are not counted.
//   impression: every target re-encodes the history, m * (n^2 d + n d^2)
//   roo:        one pass over history plus targets, (n+m)^2 d + (n+m) d^2
// Both throw std::overflow_error when the result does not fit in 64 bits.
std::uint64_t impression_seq_cost(std::uint64_t n, std::uint64_t m,
                                  std::uint64_t d);
std::uint64_t roo_seq_cost(std::uint64_t n, std::uint64_t m, std::uint64_t d);

// impression_seq_cost / roo_seq_cost; std::domain_error when the roo cost is 0.
double seq_savings_ratio(std::uint64_t n, std::uint64_t m, std::uint64_t d);

// b_nro / b_ro; std::invalid_argument on an empty batch.
double dedup_ratio(const JaggedBatch& batch);

// Counters of one forward run plus an id naming its data and parameters.
struct RunCounters {
  std::string run_id;
  ForwardCounters counters;
};

struct CostReport {
  std::string run_id;
  std::uint64_t impression_flops = 0;
  std::uint64_t roo_flops = 0;
  // impression_flops / roo_flops, 0 when roo_flops == 0.
  double savings_ratio = 0.0;
  std::map<FeatureId, std::uint64_t> rows_fetched_roo;
  std::map<FeatureId, std::uint64_t> rows_fetched_impression;
  std::uint64_t bytes_comm_roo = 0;
  std::uint64_t bytes_comm_impression = 0;
  std::uint64_t b_ro = 0;
  std::uint64_t b_nro = 0;

  std::uint64_t total_rows_roo() const;
  std::uint64_t total_rows_impression() const;
};

// Throws std::invalid_argument when the two runs carry different run ids or
// did not see the same impressions.
CostReport measure_run(const RunCounters& roo, const RunCounters& impression);

std::string cost_report_to_json(const CostReport& report);
CostReport cost_report_from_json(const std::string& text);

// Counter (de)serialisation shared with the run directory writer.
std::string counters_to_json(const ForwardCounters& counters);
ForwardCounters counters_from_json(const std::string& text);

}  // namespace roo

#endif  // ROO_COST_H_
