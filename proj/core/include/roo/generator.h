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


#ifndef ROO_GENERATOR_H_
#define ROO_GENERATOR_H_

// Seeded synthetic event streams.

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "roo/event.h"
#include "roo/schema.h"

namespace roo {

// Feature ids used by generated streams.
inline constexpr FeatureId kFirstRoDense = 1;
inline constexpr FeatureId kHistoryItems = 100;
inline constexpr FeatureId kHistoryActions = 101;
inline constexpr FeatureId kHistoryContexts = 102;
inline constexpr FeatureId kFirstRoIdList = 110;
inline constexpr FeatureId kFirstNroDense = 200;
inline constexpr FeatureId kFirstNroIdList = 300;

struct GeneratorConfig {
  std::uint64_t seed = 42;
  std::uint32_t num_users = 1000;
  std::uint32_t requests_per_user = 10;
  // Items per request: fixed when k_fixed > 0, otherwise drawn from
  // k_weights over {1..10} (defaults to uniform over 4..7).
  std::uint32_t k_fixed = 0;
  std::array<double, 10> k_weights = {0, 0, 0, 1, 1, 1, 1, 0, 0, 0};
  std::uint64_t num_items = 100'000;
  // Per-label probability that an impressed item converts on that label.
  std::map<LabelId, double> conversion_rates = {{1, 0.3}, {2, 0.1}};
  // Event times of a request fall inside [t0, t0 + span], span uniform on
  // {0..window_ms-1}; requests of one user are more than window_ms apart.
  std::int64_t window_ms = 60'000;
  std::uint32_t n_ro_dense = 4;
  std::uint32_t n_ro_idlist = 2;
  std::uint32_t ro_idlist_len = 8;
  // History length uniform on {history_min..history_max}; 0..0 disables
  // the history features.
  std::uint32_t history_min = 0;
  std::uint32_t history_max = 64;
  std::uint32_t n_nro_dense = 2;
  std::uint32_t n_nro_idlist = 1;
  std::uint32_t nro_idlist_len = 4;
  // Probability a conversion event is lost before the request-level joiner.
  double loss_rate = 0.0;

  bool has_history() const { return history_max > 0; }
  // Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

FeatureRegistry generator_registry(const GeneratorConfig& config);

// Complete, time-ordered event log. Impressions precede conversions of the
// same request at equal times. Every event carries the request's total
// event count in expected_events.
std::vector<Event> generate_events(const GeneratorConfig& config);

// Drops conversion events i.i.d. with probability loss_rate (seeded).
std::vector<Event> apply_conversion_loss(const std::vector<Event>& events,
                                         double loss_rate, std::uint64_t seed);

// Feature registry implied by the payloads of a stream's impressions.
// Throws ValidationError when a feature id appears under two kinds.
FeatureRegistry infer_registry(const std::vector<Event>& events);

}  // namespace roo

#endif  // ROO_GENERATOR_H_
