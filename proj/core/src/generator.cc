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


#include "roo/generator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

namespace roo {
namespace {

constexpr std::uint64_t kActionVocab = 15;
constexpr std::uint64_t kContextVocab = 63;
constexpr std::uint64_t kIdVocab = 1'000'000;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform on [0, n). Modulo bias is below 2^-40 for the sizes used here.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  float unit_f() { return static_cast<float>(engine_() >> 40) * 0x1.0p-24f; }

 private:
  std::mt19937_64 engine_;
};

std::uint32_t draw_k(const GeneratorConfig& c, Rng& rng) {
  if (c.k_fixed > 0) return c.k_fixed;
  const double total = std::accumulate(c.k_weights.begin(), c.k_weights.end(), 0.0);
  double u = rng.unit() * total;
  for (std::uint32_t i = 0; i < c.k_weights.size(); ++i) {
    if (c.k_weights[i] <= 0.0) continue;
    if (u < c.k_weights[i]) return i + 1;
    u -= c.k_weights[i];
  }
  // Rounding at the top end: last bucket with positive weight.
  for (std::uint32_t i = c.k_weights.size(); i-- > 0;) {
    if (c.k_weights[i] > 0.0) return i + 1;
  }
  return 1;
}

std::vector<std::uint64_t> draw_ids(Rng& rng, std::uint64_t len,
                                    std::uint64_t vocab) {
  std::vector<std::uint64_t> ids(len);
  for (auto& id : ids) id = rng.between(1, vocab);
  return ids;
}

struct Keyed {
  std::tuple<std::int64_t, UserId, RequestId, int, std::uint32_t> key;
  Event event;
};

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& m) {
    throw std::invalid_argument("generator config: " + m);
  };
  if (window_ms <= 0) fail("window_ms must be > 0");
  if (k_fixed > 10) fail("k_fixed must be in 0..10");
  if (k_fixed == 0) {
    double total = 0.0;
    for (double w : k_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) fail("k_weights must be finite and >= 0");
      total += w;
    }
    if (total <= 0.0) fail("k_weights must have a positive entry");
  }
  if (num_items < 10) fail("num_items must be >= 10");
  for (const auto& [label, p] : conversion_rates) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail("conversion rate for label " + std::to_string(label) + " not in [0,1]");
    }
  }
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) fail("loss_rate not in [0,1]");
  if (history_min > history_max) fail("history_min > history_max");
  if (n_ro_idlist > 0 && ro_idlist_len == 0) fail("ro_idlist_len must be >= 1");
  if (n_nro_idlist > 0 && nro_idlist_len == 0) fail("nro_idlist_len must be >= 1");
  if (n_ro_dense + n_ro_idlist == 0 && !has_history()) {
    fail("streams need at least one request-only feature");
  }
  if (n_ro_dense >= kHistoryItems - kFirstRoDense ||
      n_ro_idlist >= kFirstNroDense - kFirstRoIdList ||
      n_nro_dense >= kFirstNroIdList - kFirstNroDense || n_nro_idlist > 1000) {
    fail("too many features of one kind");
  }
}

FeatureRegistry generator_registry(const GeneratorConfig& c) {
  FeatureRegistry r;
  for (std::uint32_t i = 0; i < c.n_ro_dense; ++i) {
    r.add(FeatureKind::kRoDense, kFirstRoDense + i);
  }
  if (c.has_history()) {
    r.add(FeatureKind::kRoIdList, kHistoryItems);
    r.add(FeatureKind::kRoIdList, kHistoryActions);
    r.add(FeatureKind::kRoIdList, kHistoryContexts);
  }
  for (std::uint32_t i = 0; i < c.n_ro_idlist; ++i) {
    r.add(FeatureKind::kRoIdList, kFirstRoIdList + i);
  }
  for (std::uint32_t i = 0; i < c.n_nro_dense; ++i) {
    r.add(FeatureKind::kNroDense, kFirstNroDense + i);
  }
  for (std::uint32_t i = 0; i < c.n_nro_idlist; ++i) {
    r.add(FeatureKind::kNroIdList, kFirstNroIdList + i);
  }
  return r;
}

std::vector<Event> generate_events(const GeneratorConfig& c) {
  c.validate();
  Rng rng(c.seed);
  const std::int64_t T = c.window_ms;
  std::vector<Keyed> out;
  RequestId next_request = 1;

  for (UserId user = 1; user <= c.num_users; ++user) {
    const std::int64_t user_start = static_cast<std::int64_t>(
        rng.below(static_cast<std::uint64_t>(T) * std::max(c.requests_per_user, 1u)));
    for (std::uint32_t j = 0; j < c.requests_per_user; ++j) {
      const RequestId request = next_request++;
      const std::int64_t t0 = user_start + static_cast<std::int64_t>(j) * 2 * T +
                              static_cast<std::int64_t>(rng.below(T));
      const std::int64_t span = static_cast<std::int64_t>(rng.below(T));
      const std::uint32_t k = draw_k(c, rng);

      Event proto;
      proto.user_id = user;
      proto.request_id = request;
      for (std::uint32_t i = 0; i < c.n_ro_dense; ++i) {
        proto.ro_dense[kFirstRoDense + i] = rng.unit_f();
      }
      if (c.has_history()) {
        const std::uint64_t h = rng.between(c.history_min, c.history_max);
        proto.ro_idlist[kHistoryItems] = draw_ids(rng, h, c.num_items);
        proto.ro_idlist[kHistoryActions] = draw_ids(rng, h, kActionVocab);
        proto.ro_idlist[kHistoryContexts] = draw_ids(rng, h, kContextVocab);
      }
      for (std::uint32_t i = 0; i < c.n_ro_idlist; ++i) {
        proto.ro_idlist[kFirstRoIdList + i] =
            draw_ids(rng, rng.between(1, c.ro_idlist_len), kIdVocab);
      }

      std::set<ItemId> seen;
      std::vector<Event> events;
      for (std::uint32_t i = 0; i < k; ++i) {
        ItemId item;
        do {
          item = rng.between(1, c.num_items);
        } while (!seen.insert(item).second);
        Event e = proto;
        e.item_id = item;
        e.kind = EventKind::kImpression;
        std::int64_t offset = 0;
        if (i == k - 1 && k > 1) {
          offset = span;
        } else if (i > 0) {
          offset = static_cast<std::int64_t>(rng.below(span + 1));
        }
        e.event_time = t0 + offset;
        for (std::uint32_t f = 0; f < c.n_nro_dense; ++f) {
          e.nro_dense[kFirstNroDense + f] = rng.unit_f();
        }
        for (std::uint32_t f = 0; f < c.n_nro_idlist; ++f) {
          e.nro_idlist[kFirstNroIdList + f] =
              draw_ids(rng, rng.between(1, c.nro_idlist_len), kIdVocab);
        }
        events.push_back(std::move(e));
      }
      const std::size_t impressions = events.size();
      for (std::size_t i = 0; i < impressions; ++i) {
        for (const auto& [label, p] : c.conversion_rates) {
          if (rng.unit() >= p) continue;
          Event e;
          e.user_id = user;
          e.request_id = request;
          e.item_id = events[i].item_id;
          e.kind = EventKind::kConversion;
          e.item_labels = {label};
          const std::int64_t lo = events[i].event_time;
          e.event_time =
              lo + static_cast<std::int64_t>(rng.below(t0 + span - lo + 1));
          events.push_back(std::move(e));
        }
      }
      const auto expected = static_cast<std::uint32_t>(events.size());
      for (std::uint32_t seq = 0; seq < events.size(); ++seq) {
        Event& e = events[seq];
        e.expected_events = expected;
        const int kind = e.kind == EventKind::kImpression ? 0 : 1;
        out.push_back({{e.event_time, user, request, kind, seq}, std::move(e)});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
  std::vector<Event> events;
  events.reserve(out.size());
  for (Keyed& k : out) events.push_back(std::move(k.event));
  return events;
}

std::vector<Event> apply_conversion_loss(const std::vector<Event>& events,
                                         double loss_rate, std::uint64_t seed) {
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
    throw std::invalid_argument("loss_rate not in [0,1]");
  }
  Rng rng(seed ^ 0x6C6F73735F726E67ULL);
  std::vector<Event> kept;
  kept.reserve(events.size());
  for (const Event& e : events) {
    if (e.kind == EventKind::kConversion && rng.unit() < loss_rate) continue;
    kept.push_back(e);
  }
  return kept;
}

FeatureRegistry infer_registry(const std::vector<Event>& events) {
  std::map<FeatureId, FeatureKind> kinds;
  std::vector<Violation> conflicts;
  auto note = [&](const Event& e, FeatureId id, FeatureKind kind) {
    auto [it, inserted] = kinds.emplace(id, kind);
    if (!inserted && it->second != kind) {
      conflicts.push_back({e.request_id, "feature " + std::to_string(id),
                           std::string("seen as both ") + to_string(it->second) +
                               " and " + to_string(kind)});
    }
  };
  for (const Event& e : events) {
    if (e.kind != EventKind::kImpression) continue;
    for (const auto& [id, v] : e.ro_dense) note(e, id, FeatureKind::kRoDense);
    for (const auto& [id, v] : e.ro_idlist) note(e, id, FeatureKind::kRoIdList);
    for (const auto& [id, v] : e.nro_dense) note(e, id, FeatureKind::kNroDense);
    for (const auto& [id, v] : e.nro_idlist) note(e, id, FeatureKind::kNroIdList);
    if (conflicts.size() > 16) break;
  }
  if (!conflicts.empty()) throw ValidationError(std::move(conflicts));
  FeatureRegistry r;
  for (const auto& [id, kind] : kinds) r.add(kind, id);
  return r;
}

}  // namespace roo
