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


#ifndef ROO_IMPRESSION_JOINER_H_
#define ROO_IMPRESSION_JOINER_H_

// Reference impression-level joiner: one buffer per (request, item) that
// collects the impression's features and its conversions for window_ms.
// Used as the oracle the request-level joiner is audited against.

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "roo/event.h"
#include "roo/schema.h"

namespace roo {

struct ImpressionJoinerMetrics {
  std::uint64_t events_ingested = 0;
  std::uint64_t samples_published = 0;
  std::uint64_t late_events_dropped = 0;
};

class ImpressionJoiner {
 public:
  explicit ImpressionJoiner(std::int64_t window_ms);

  // Throws std::invalid_argument on a malformed event.
  void ingest(const Event& e);
  // Closes buffers with open_time + window_ms <= now_ms, ordered by
  // (open_time, request_id, item_id). now_ms must not decrease.
  std::vector<ImpressionSample> tick(std::int64_t now_ms);
  std::vector<ImpressionSample> drain();

  const ImpressionJoinerMetrics& metrics() const { return metrics_; }
  std::size_t open_buffers() const { return open_.size(); }

 private:
  using Key = std::pair<RequestId, ItemId>;
  struct Buffer {
    std::int64_t open_time = 0;
    ImpressionSample sample;
    std::set<LabelId> labels;
  };
  ImpressionSample close(const Key& key);

  std::int64_t window_ms_;
  std::map<Key, Buffer> open_;
  std::set<std::tuple<std::int64_t, RequestId, ItemId>> deadlines_;
  std::set<Key> published_;
  std::int64_t last_tick_ = std::numeric_limits<std::int64_t>::min();
  ImpressionJoinerMetrics metrics_;
};

std::vector<ImpressionSample> join_impressions(
    const std::vector<Event>& events, std::int64_t window_ms,
    ImpressionJoinerMetrics* metrics = nullptr);

}  // namespace roo

#endif  // ROO_IMPRESSION_JOINER_H_
