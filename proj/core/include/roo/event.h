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

#ifndef ROO_EVENT_H_
#define ROO_EVENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "roo/schema.h"

namespace roo {

enum class EventKind { kImpression, kConversion };

// One logged user-item interaction. Impressions carry the request-only and
// item-side feature payloads; conversions carry labels only.
struct Event {
  std::int64_t event_time = 0;  // milliseconds
  UserId user_id = 0;
  RequestId request_id = 0;
  ItemId item_id = 0;
  EventKind kind = EventKind::kImpression;
  std::vector<LabelId> item_labels;
  DenseMap ro_dense;
  IdListMap ro_idlist;
  DenseMap nro_dense;
  IdListMap nro_idlist;
  // Number of events the producer will emit for this request, 0 if unknown.
  // Drives the dynamic close trigger.
  std::uint32_t expected_events = 0;

  bool operator==(const Event&) const = default;
};

// Empty string when the event is well formed, otherwise a description.
std::string check_event(const Event& e);

}  // namespace roo

#endif  // ROO_EVENT_H_
