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

#ifndef ROO_JSONL_H_
#define ROO_JSONL_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "roo/event.h"
#include "roo/schema.h"

namespace roo {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Single-line JSON encodings. Maps are objects keyed by the decimal feature
// id in ascending numeric order; floats use the shortest text that reads
// back to the same f32.
std::string to_json_line(const RequestSample& s);
std::string to_json_line(const ImpressionSample& s);
std::string to_json_line(const Event& e);

RequestSample request_sample_from_json(std::string_view line);
ImpressionSample impression_sample_from_json(std::string_view line);
Event event_from_json(std::string_view line);

template <typename T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& rows);

std::vector<RequestSample> read_request_samples(const std::filesystem::path& p);
std::vector<ImpressionSample> read_impression_samples(
    const std::filesystem::path& p);
std::vector<Event> read_events(const std::filesystem::path& p);

}  // namespace roo

#endif  // ROO_JSONL_H_
