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

#include "roo/joiner.h"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace roo {

void JoinerConfig::validate() const {
  if (window_ms <= 0) {
    throw std::invalid_argument("joiner window_ms must be > 0");
  }
  if (engagement_threshold < 1) {
    throw std::invalid_argument("joiner engagement_threshold must be >= 1");
  }
}

bool RequestJoinRecord::has_impression(ItemId item) const {
  return std::find(impressions.begin(), impressions.end(), item) !=
         impressions.end();
}

std::size_t RequestJoinRecord::ro_bytes() const {
  std::size_t bytes = ro_float.size() * sizeof(float);
  for (const auto& [id, ids] : ro_idlist) {
    bytes += sizeof(std::uint32_t) + ids.size() * sizeof(std::uint64_t);
  }
  return bytes;
}

RequestSample RequestJoinRecord::to_sample() const {
  RequestSample s;
  s.request_id = request_id;
  s.user_id = user_id;
  s.items = impressions;
  s.ro_dense = ro_float;
  s.ro_idlist = ro_idlist;

  std::set<FeatureId> dense_ids;
  std::set<FeatureId> idlist_ids;
  for (ItemId item : impressions) {
    if (auto it = nro_float.find(item); it != nro_float.end()) {
      for (const auto& [id, _] : it->second) dense_ids.insert(id);
    }
    if (auto it = nro_idlist.find(item); it != nro_idlist.end()) {
      for (const auto& [id, _] : it->second) idlist_ids.insert(id);
    }
  }

  // An item whose payload lacks a feature seen on its siblings gets 0.0 /
  // an empty list so the per-item arrays stay aligned.
  for (FeatureId id : dense_ids) s.nro_dense[id].reserve(impressions.size());
  for (FeatureId id : idlist_ids) s.nro_idlist[id].reserve(impressions.size());
  for (ItemId item : impressions) {
    auto labels = conversions.find(item);
    s.conversions.emplace_back();
    if (labels != conversions.end()) {
      s.conversions.back().assign(labels->second.begin(), labels->second.end());
    }
    auto dense = nro_float.find(item);
    for (FeatureId id : dense_ids) {
      float v = 0.0f;
      if (dense != nro_float.end()) {
        if (auto f = dense->second.find(id); f != dense->second.end()) {
          v = f->second;
        }
      }
      s.nro_dense[id].push_back(v);
    }
    auto lists = nro_idlist.find(item);
    for (FeatureId id : idlist_ids) {
      std::vector<std::uint64_t> ids;
      if (lists != nro_idlist.end()) {
        if (auto f = lists->second.find(id); f != lists->second.end()) {
          ids = f->second;
        }
      }
      s.nro_idlist[id].push_back(std::move(ids));
    }
  }
  return s;
}

RequestJoiner::RequestJoiner(JoinerConfig config) : config_(config) {
  config_.validate();
}

const RequestJoinRecord* RequestJoiner::find_open(UserId user) const {
  auto it = open_.find(user);
  return it == open_.end() ? nullptr : &it->second;
}

RequestJoinRecord& RequestJoiner::open_window(const Event& e) {
  RequestJoinRecord rec;
  rec.user_id = e.user_id;
  rec.request_id = e.request_id;
  rec.open_time = e.event_time;
  rec.first_event_time = e.event_time;
  rec.last_event_time = e.event_time;
  rec.impressions.push_back(e.item_id);
  rec.ro_float = e.ro_dense;
  rec.ro_idlist = e.ro_idlist;
  rec.nro_float.emplace(e.item_id, e.nro_dense);
  rec.nro_idlist.emplace(e.item_id, e.nro_idlist);
  by_open_time_.emplace(rec.open_time, rec.user_id, rec.request_id);
  return open_.insert_or_assign(e.user_id, std::move(rec)).first->second;
}

std::vector<RequestSample> RequestJoiner::ingest(const Event& e) {
  if (auto problem = check_event(e); !problem.empty()) {
    throw std::invalid_argument("malformed event for user " +
                                std::to_string(e.user_id) + " request " +
                                std::to_string(e.request_id) + ": " + problem);
  }
  ++metrics_.events_ingested;
  std::vector<RequestSample> out;
  auto it = open_.find(e.user_id);

  if (e.kind == EventKind::kConversion) {
    if (it == open_.end() || it->second.request_id != e.request_id ||
        !it->second.has_impression(e.item_id)) {
      ++metrics_.late_events_dropped;
      if (!published_.count({e.user_id, e.request_id})) {
        ++metrics_.orphan_conversions;
      }
      return out;
    }
  } else {
    if (published_.count({e.user_id, e.request_id})) {
      ++metrics_.late_events_dropped;
      return out;
    }
    if (it != open_.end() && it->second.request_id != e.request_id) {
      out.push_back(close(e.user_id, CloseReason::kNewRequest, e.event_time));
      it = open_.end();
    }
  }

  RequestJoinRecord* rec = nullptr;
  if (it == open_.end()) {
    rec = &open_window(e);
  } else {
    rec = &it->second;
    if (rec->has_impression(e.item_id)) {
      auto& labels = rec->conversions[e.item_id];
      labels.insert(e.item_labels.begin(), e.item_labels.end());
      if (labels.empty()) rec->conversions.erase(e.item_id);
    } else {
      rec->impressions.push_back(e.item_id);
      rec->nro_float.emplace(e.item_id, e.nro_dense);
      rec->nro_idlist.emplace(e.item_id, e.nro_idlist);
    }
    rec->first_event_time = std::min(rec->first_event_time, e.event_time);
    rec->last_event_time = std::max(rec->last_event_time, e.event_time);
  }
  ++rec->event_count;
  rec->expected_events = std::max(rec->expected_events, e.expected_events);

  if (rec->impressions.size() >= config_.engagement_threshold) {
    out.push_back(
        close(e.user_id, CloseReason::kEngagementThreshold, e.event_time));
  } else if (config_.dynamic_trigger && rec->expected_events > 0 &&
             rec->event_count >= rec->expected_events) {
    out.push_back(close(e.user_id, CloseReason::kDynamicTrigger, e.event_time));
  }
  return out;
}

RequestSample RequestJoiner::close(UserId user, CloseReason reason,
                                   std::int64_t close_time) {
  auto node = open_.extract(user);
  RequestJoinRecord& rec = node.mapped();
  by_open_time_.erase({rec.open_time, rec.user_id, rec.request_id});
  published_.emplace(rec.user_id, rec.request_id);

  ++metrics_.samples_published;
  ++metrics_.closes_by_reason[reason];
  sum_close_latency_ += static_cast<double>(close_time - rec.first_event_time);
  sum_gap_ += static_cast<double>(rec.last_event_time - rec.first_event_time);
  sum_landing_ += static_cast<double>(close_time - rec.open_time);
  return rec.to_sample();
}

std::vector<RequestSample> RequestJoiner::tick(std::int64_t now_ms) {
  if (now_ms < last_tick_) {
    throw std::invalid_argument("tick time went backwards");
  }
  last_tick_ = now_ms;
  std::vector<RequestSample> out;
  while (!by_open_time_.empty()) {
    auto [open_time, user, request] = *by_open_time_.begin();
    if (open_time + config_.window_ms > now_ms) break;
    out.push_back(close(user, CloseReason::kWindowTimeUp,
                        open_time + config_.window_ms));
  }
  return out;
}

std::vector<RequestSample> RequestJoiner::drain() {
  std::vector<RequestSample> out;
  while (!by_open_time_.empty()) {
    auto [open_time, user, request] = *by_open_time_.begin();
    out.push_back(close(user, CloseReason::kDrain, open_time + config_.window_ms));
  }
  return out;
}

JoinerMetrics RequestJoiner::metrics() const {
  JoinerMetrics m = metrics_;
  if (m.samples_published > 0) {
    const auto n = static_cast<double>(m.samples_published);
    m.mean_close_latency_ms = sum_close_latency_ / n;
    m.mean_intra_request_gap_ms = sum_gap_ / n;
    m.mean_landing_latency_ms = sum_landing_ / n;
  }
  return m;
}

std::vector<RequestSample> join_stream(const std::vector<Event>& events,
                                       const JoinerConfig& config,
                                       JoinerMetrics* metrics) {
  RequestJoiner joiner(config);
  std::vector<RequestSample> out;
  auto append = [&out](std::vector<RequestSample>&& more) {
    for (auto& s : more) out.push_back(std::move(s));
  };
  std::int64_t now = std::numeric_limits<std::int64_t>::min();
  for (const Event& e : events) {
    now = std::max(now, e.event_time);
    append(joiner.tick(now));
    append(joiner.ingest(e));
  }
  append(joiner.drain());
  if (metrics != nullptr) *metrics = joiner.metrics();
  return out;
}

std::vector<RequestSample> join_stream_sharded(const std::vector<Event>& events,
                                               const JoinerConfig& config,
                                               unsigned shards) {
  if (shards == 0) throw std::invalid_argument("shard count must be >= 1");
  config.validate();
  std::vector<std::vector<Event>> parts(shards);
  for (const Event& e : events) parts[e.user_id % shards].push_back(e);

  std::vector<std::vector<RequestSample>> results(shards);
  {
    std::vector<std::jthread> workers;
    workers.reserve(shards);
    for (unsigned i = 0; i < shards; ++i) {
      workers.emplace_back(
          [&, i] { results[i] = join_stream(parts[i], config); });
    }
  }

  std::vector<RequestSample> out;
  for (auto& part : results) {
    for (auto& s : part) out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const RequestSample& a, const RequestSample& b) {
              return std::tie(a.request_id, a.user_id) <
                     std::tie(b.request_id, b.user_id);
            });
  return out;
}

}  // namespace roo
