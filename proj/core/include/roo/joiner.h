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

#ifndef ROO_JOINER_H_
#define ROO_JOINER_H_

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "roo/event.h"
#include "roo/schema.h"

namespace roo {

struct JoinerConfig {
  std::int64_t window_ms = 60'000;
  std::uint32_t engagement_threshold = 1'000;
  // Close a window as soon as it has seen the producer-declared number of
  // events (Event::expected_events).
  bool dynamic_trigger = false;

  // Throws std::invalid_argument on window_ms <= 0 or threshold < 1.
  void validate() const;
};

enum class CloseReason {
  kNewRequest,
  kEngagementThreshold,
  kDynamicTrigger,
  kWindowTimeUp,
  kDrain,
};

struct JoinerMetrics {
  std::uint64_t events_ingested = 0;
  std::uint64_t samples_published = 0;
  // Late conversions/impressions for closed windows plus orphan conversions.
  std::uint64_t late_events_dropped = 0;
  std::uint64_t orphan_conversions = 0;
  std::map<CloseReason, std::uint64_t> closes_by_reason;
  double mean_close_latency_ms = 0.0;
  double mean_intra_request_gap_ms = 0.0;
  double mean_landing_latency_ms = 0.0;
};

// Buffer for one open (user, request) window. Request-only features are kept
// once no matter how many impressions join.
struct RequestJoinRecord {
  UserId user_id = 0;
  RequestId request_id = 0;
  std::vector<ItemId> impressions;  // first-seen order
  std::map<ItemId, std::set<LabelId>> conversions;
  DenseMap ro_float;
  IdListMap ro_idlist;
  std::map<ItemId, DenseMap> nro_float;
  std::map<ItemId, IdListMap> nro_idlist;
  std::int64_t open_time = 0;
  std::int64_t first_event_time = 0;
  std::int64_t last_event_time = 0;
  std::uint32_t event_count = 0;
  std::uint32_t expected_events = 0;

  bool has_impression(ItemId item) const;
  // Bytes held for request-only features (4 per float, 4 + 8 per id list).
  std::size_t ro_bytes() const;
  RequestSample to_sample() const;
};

// Streaming request-level joiner for one shard of users. Each user has at
// most one open window; a new request id closes the previous one.
class RequestJoiner {
 public:
  explicit RequestJoiner(JoinerConfig config);

  // Returns the samples closed by this event: the user's previous window
  // when the request id changed, and/or the event's own window when it hit
  // the engagement threshold or the dynamic trigger. Throws
  // std::invalid_argument on a malformed event.
  std::vector<RequestSample> ingest(const Event& e);

  // Closes every window with open_time + window_ms <= now_ms, ordered by
  // (open_time, user_id, request_id). now_ms must not decrease.
  std::vector<RequestSample> tick(std::int64_t now_ms);

  // Closes all open windows in tick order.
  std::vector<RequestSample> drain();

  JoinerMetrics metrics() const;

  std::size_t open_windows() const { return open_.size(); }
  const RequestJoinRecord* find_open(UserId user) const;
  const JoinerConfig& config() const { return config_; }

 private:
  using DeadlineKey = std::tuple<std::int64_t, UserId, RequestId>;

  RequestSample close(UserId user, CloseReason reason, std::int64_t close_time);
  RequestJoinRecord& open_window(const Event& e);

  JoinerConfig config_;
  std::map<UserId, RequestJoinRecord> open_;
  std::set<DeadlineKey> by_open_time_;
  std::set<std::pair<UserId, RequestId>> published_;
  std::int64_t last_tick_ = std::numeric_limits<std::int64_t>::min();

  JoinerMetrics metrics_;
  double sum_close_latency_ = 0.0;
  double sum_gap_ = 0.0;
  double sum_landing_ = 0.0;
};

// Joins a whole time-ordered stream: tick(event_time) before every event,
// drain at the end.
std::vector<RequestSample> join_stream(const std::vector<Event>& events,
                                       const JoinerConfig& config,
                                       JoinerMetrics* metrics = nullptr);

// Same result set as join_stream, computed by `shards` single-writer
// RequestJoiners on separate threads (users partitioned by user_id).
// Output is ordered by (request_id, user_id) so it is independent of the
// shard count.
std::vector<RequestSample> join_stream_sharded(const std::vector<Event>& events,
                                               const JoinerConfig& config,
                                               unsigned shards);

}  // namespace roo

#endif  // ROO_JOINER_H_
