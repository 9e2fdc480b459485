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


#ifndef ROO_REPORT_H_
#define ROO_REPORT_H_

// Consolidated report over run directories. Sections are copied from the
// JSON files the other stages wrote; nothing is recomputed.
//
//   runs       manifest.json of every directory
//   footprint  footprint.json       (roo runs preferred)
//   latency    joiner_metrics.json  (roo runs preferred)
//   cost       cost.json
//   audit      audit.json
//
// A section with no source is emitted as {"status": "absent"}.

#include <filesystem>
#include <string>
#include <vector>

namespace roo {

struct Report {
  std::string json;
  std::string table;
};

// Throws std::runtime_error when an input directory does not exist or none
// of them contains a run manifest.
Report build_report(const std::vector<std::filesystem::path>& dirs);

}  // namespace roo

#endif  // ROO_REPORT_H_
