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


#include "roo/impression_joiner.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace roo {

ImpressionJoiner::ImpressionJoiner(std::int64_t window_ms) : window_ms_(window_ms) {
  if (window_ms <= 0) throw std::invalid_argument("window_ms must be > 0");
}

void ImpressionJoiner::ingest(const Event& e) {
  if (std::string err = check_event(e); !err.empty()) {
    throw std::invalid_argument("malformed event: " + err);
  }
  ++metrics_.events_ingested;
  const Key key{e.request_id, e.item_id};
  auto it = open_.find(key);
  if (e.kind == EventKind::kImpression) {
    if (it != open_.end()) return;  // repeated impression, first one wins
    if (published_.count(key) != 0) {
      ++metrics_.late_events_dropped;
      return;
    }
    Buffer b;
    b.open_time = e.event_time;
    b.sample.request_id = e.request_id;
    b.sample.user_id = e.user_id;
    b.sample.item_id = e.item_id;
    b.sample.dense_features = e.ro_dense;
    b.sample.dense_features.insert(e.nro_dense.begin(), e.nro_dense.end());
    b.sample.idlist_features = e.ro_idlist;
    b.sample.idlist_features.insert(e.nro_idlist.begin(), e.nro_idlist.end());
    deadlines_.emplace(e.event_time, e.request_id, e.item_id);
    open_.emplace(key, std::move(b));
    return;
  }
  if (it == open_.end()) {
    ++metrics_.late_events_dropped;
    return;
  }
  it->second.labels.insert(e.item_labels.begin(), e.item_labels.end());
}

ImpressionSample ImpressionJoiner::close(const Key& key) {
  auto it = open_.find(key);
  Buffer b = std::move(it->second);
  open_.erase(it);
  deadlines_.erase({b.open_time, key.first, key.second});
  published_.insert(key);
  b.sample.conversions.assign(b.labels.begin(), b.labels.end());
  ++metrics_.samples_published;
  return std::move(b.sample);
}

std::vector<ImpressionSample> ImpressionJoiner::tick(std::int64_t now_ms) {
  if (now_ms < last_tick_) {
    throw std::invalid_argument("tick time went backwards");
  }
  last_tick_ = now_ms;
  std::vector<ImpressionSample> out;
  while (!deadlines_.empty()) {
    const auto [open_time, request, item] = *deadlines_.begin();
    if (open_time + window_ms_ > now_ms) break;
    out.push_back(close({request, item}));
  }
  return out;
}

std::vector<ImpressionSample> ImpressionJoiner::drain() {
  std::vector<ImpressionSample> out;
  while (!deadlines_.empty()) {
    const auto [open_time, request, item] = *deadlines_.begin();
    out.push_back(close({request, item}));
  }
  return out;
}

std::vector<ImpressionSample> join_impressions(const std::vector<Event>& events,
                                               std::int64_t window_ms,
                                               ImpressionJoinerMetrics* metrics) {
  ImpressionJoiner joiner(window_ms);
  std::vector<ImpressionSample> out;
  std::int64_t now = std::numeric_limits<std::int64_t>::min();
  auto append = [&out](std::vector<ImpressionSample>&& v) {
    for (auto& s : v) out.push_back(std::move(s));
  };
  for (const Event& e : events) {
    now = std::max(now, e.event_time);
    append(joiner.tick(now));
    joiner.ingest(e);
  }
  append(joiner.drain());
  if (metrics != nullptr) *metrics = joiner.metrics();
  return out;
}

}  // namespace roo
