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

#ifndef ROO_STORE_H_
#define ROO_STORE_H_

// Feature-flattened columnar block files.
//
// Layout (all integers little-endian):
//
//   header   "ROO1" | u16 version (1) | u16 layout | u64 sample_count
//   columns  raw column buffers, back to back
//   footer   column_count entries of
//              u32 kind | u64 feature_id | u64 offset | u64 byte_length
//   trailer  u32 column_count | u64 footer_offset | u32 crc32 | "ROO1"
//
// The CRC32 covers every byte before it. Lengths are u32, dense values f32,
// ids u64, labels u32. A request-layout block stores one row per request for
// request-only columns and one row per impression for item-side columns,
// with impressions_per_sample linking the two; an impression-layout block
// stores every column at one row per impression using the same encodings.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "roo/schema.h"

namespace roo {

enum class StoreErrc {
  kIo,
  kBadMagic,
  kTruncated,
  kChecksumMismatch,
  kCorrupt,
  kMixedFeatures,
  kWrongLayout,
  kInvalidSample,
};

const char* to_string(StoreErrc code);

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrc code, const std::string& what);
  StoreErrc code() const { return code_; }

 private:
  StoreErrc code_;
};

enum class BlockLayout : std::uint16_t { kRequest = 1, kImpression = 2 };

enum class ColumnKind : std::uint32_t {
  kRequestIds = 1,
  kUserIds = 2,
  kImpressionsPerSample = 3,
  kItems = 4,
  kConversionLengths = 5,
  kConversionLabels = 6,
  kRoDense = 10,
  kRoIdListLengths = 11,
  kRoIdListValues = 12,
  kNroDense = 13,
  kNroIdListLengths = 14,
  kNroIdListValues = 15,
  kDense = 20,
  kIdListLengths = 21,
  kIdListValues = 22,
  kIdScoreLengths = 23,
  kIdScoreKeys = 24,
  kIdScoreWeights = 25,
};

struct ColumnInfo {
  ColumnKind kind;
  FeatureId feature_id = 0;
  std::uint64_t offset = 0;
  std::uint64_t byte_length = 0;
};

struct WriteSummary {
  std::uint64_t bytes_written = 0;
  std::uint64_t sample_count = 0;
};

std::string encode_request_block(const std::vector<RequestSample>& samples);
std::vector<RequestSample> decode_request_block(std::string_view bytes);
std::string encode_impression_block(
    const std::vector<ImpressionSample>& samples);
std::vector<ImpressionSample> decode_impression_block(std::string_view bytes);

// Column directory of an encoded block (validates magic, trailer and CRC).
std::vector<ColumnInfo> block_columns(std::string_view bytes);
BlockLayout block_layout(std::string_view bytes);

// Every sample must carry the same feature ids as the first one; a block
// mixing feature sets fails with kMixedFeatures.
WriteSummary write_block(const std::vector<RequestSample>& samples,
                         const std::filesystem::path& path);
std::vector<RequestSample> read_block(const std::filesystem::path& path);

WriteSummary write_impression_block(const std::vector<ImpressionSample>& samples,
                                    const std::filesystem::path& path);
std::vector<ImpressionSample> read_impression_block(
    const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);

struct FootprintReport {
  std::uint64_t sample_count = 0;
  std::uint64_t impression_count = 0;
  std::uint64_t roo_bytes = 0;
  std::uint64_t impression_bytes = 0;
  // Share of the request block held by per-request columns (ids and
  // request-only features).
  double ro_byte_share = 0.0;
  double mean_impressions_per_request = 0.0;
  // impression_bytes / roo_bytes - 1
  double implied_volume_increase = 0.0;
};

// Throws std::invalid_argument on empty input.
FootprintReport measure_footprint(const std::vector<RequestSample>& samples);

struct IOReport {
  std::uint64_t roo_io_bytes = 0;
  // Size of an impression-layout block holding the same impressions.
  std::uint64_t impression_io_bytes = 0;
  std::uint64_t samples_read = 0;
  std::uint64_t impressions_emitted = 0;
};

// Reads a request block and streams its expansion, one impression at a time
// in sample-then-item order.
IOReport expand_block(const std::filesystem::path& path,
                      const std::function<void(ImpressionSample&&)>& sink);
std::vector<ImpressionSample> expand_block(const std::filesystem::path& path,
                                           IOReport* report = nullptr);

}  // namespace roo

#endif  // ROO_STORE_H_
