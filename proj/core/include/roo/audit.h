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


#ifndef ROO_AUDIT_H_
#define ROO_AUDIT_H_

// Join quality audit between two joined outputs of the same stream.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "roo/schema.h"

namespace roo {

class AuditError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AuditReport {
  std::string stream_hash;
  // Per label: (request, item, label) triples present in exactly one side,
  // over triples present in either side. 0 when neither side has the label.
  std::map<LabelId, double> mismatch_rate;
  std::map<LabelId, std::uint64_t> mismatched;
  std::map<LabelId, std::uint64_t> observed;
  // (request, item) keys present on both sides over keys present on either.
  double sample_coverage = 1.0;
  // Same ratio over (request, item, feature id) triples.
  double feature_coverage = 1.0;
  std::uint64_t left_samples = 0;
  std::uint64_t right_samples = 0;
};

AuditReport audit_samples(const std::vector<ImpressionSample>& left,
                          const std::vector<ImpressionSample>& right);

// Audits two run directories. Throws AuditError when their stream hashes
// differ.
AuditReport audit_runs(const std::filesystem::path& left_run,
                       const std::filesystem::path& right_run);

std::string audit_to_json(const AuditReport& report);

}  // namespace roo

#endif  // ROO_AUDIT_H_
