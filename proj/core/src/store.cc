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

#include "roo/store.h"

#include <zlib.h>

#include <array>
#include <bit>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace roo {

const char* to_string(StoreErrc code) {
  switch (code) {
    case StoreErrc::kIo:
      return "io";
    case StoreErrc::kBadMagic:
      return "bad magic";
    case StoreErrc::kTruncated:
      return "truncated";
    case StoreErrc::kChecksumMismatch:
      return "checksum mismatch";
    case StoreErrc::kCorrupt:
      return "corrupt";
    case StoreErrc::kMixedFeatures:
      return "mixed feature sets";
    case StoreErrc::kWrongLayout:
      return "wrong layout";
    case StoreErrc::kInvalidSample:
      return "invalid sample";
  }
  return "unknown";
}

StoreError::StoreError(StoreErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code) {}

namespace {

constexpr std::string_view kMagic = "ROO1";
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 2 + 8;
constexpr std::size_t kEntrySize = 4 + 8 + 8 + 8;
constexpr std::size_t kTrailerSize = 4 + 8 + 4 + 4;

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    }
  }
  void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void put_bytes(std::string_view s) { buf_.append(s); }

  std::size_t size() const { return buf_.size(); }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw StoreError(StoreErrc::kCorrupt, "read past end of column");
    }
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos),
                static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t checked_u32(std::size_t n) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw StoreError(StoreErrc::kInvalidSample, "length exceeds u32");
  }
  return static_cast<std::uint32_t>(n);
}

// Accumulates named column buffers and assembles the final file image.
class BlockBuilder {
 public:
  ByteWriter& column(ColumnKind kind, FeatureId feature_id = 0) {
    columns_.push_back({kind, feature_id, {}});
    return columns_.back().data;
  }

  std::string finish(BlockLayout layout, std::uint64_t sample_count) {
    ByteWriter out;
    out.put_bytes(kMagic);
    out.put(kVersion);
    out.put(static_cast<std::uint16_t>(layout));
    out.put(sample_count);

    std::vector<ColumnInfo> dir;
    for (auto& c : columns_) {
      dir.push_back({c.kind, c.feature_id, out.size(), c.data.size()});
      out.put_bytes(c.data.str());
    }
    const std::uint64_t footer_offset = out.size();
    for (const ColumnInfo& c : dir) {
      out.put(static_cast<std::uint32_t>(c.kind));
      out.put(c.feature_id);
      out.put(c.offset);
      out.put(c.byte_length);
    }
    out.put(checked_u32(dir.size()));
    out.put(footer_offset);
    out.put(crc32_of(out.str()));
    out.put_bytes(kMagic);
    return std::move(out.str());
  }

 private:
  struct Pending {
    ColumnKind kind;
    FeatureId feature_id;
    ByteWriter data;
  };
  std::deque<Pending> columns_;  // stable references across column()
};

struct ParsedBlock {
  BlockLayout layout;
  std::uint64_t sample_count = 0;
  std::map<std::pair<ColumnKind, FeatureId>, std::string_view> columns;
  std::vector<ColumnInfo> directory;

  std::string_view column(ColumnKind kind, FeatureId id = 0) const {
    auto it = columns.find({kind, id});
    if (it == columns.end()) {
      throw StoreError(StoreErrc::kCorrupt,
                       "missing column kind " +
                           std::to_string(static_cast<std::uint32_t>(kind)) +
                           " feature " + std::to_string(id));
    }
    return it->second;
  }

  std::vector<FeatureId> features(ColumnKind kind) const {
    std::vector<FeatureId> out;
    for (const ColumnInfo& c : directory) {
      if (c.kind == kind) out.push_back(c.feature_id);
    }
    return out;
  }
};

ParsedBlock parse_block(std::string_view bytes) {
  if (bytes.size() >= kMagic.size() && bytes.substr(0, kMagic.size()) != kMagic) {
    throw StoreError(StoreErrc::kBadMagic, "file does not start with ROO1");
  }
  if (bytes.size() < kHeaderSize + kTrailerSize) {
    throw StoreError(StoreErrc::kTruncated,
                     "file is " + std::to_string(bytes.size()) + " bytes");
  }
  if (bytes.substr(bytes.size() - kMagic.size()) != kMagic) {
    throw StoreError(StoreErrc::kTruncated, "trailer magic missing");
  }
  const std::size_t crc_pos = bytes.size() - kMagic.size() - 4;
  ByteReader crc_reader(bytes.substr(crc_pos, 4));
  const auto stored_crc = crc_reader.get<std::uint32_t>();
  if (crc32_of(bytes.substr(0, crc_pos)) != stored_crc) {
    throw StoreError(StoreErrc::kChecksumMismatch, "crc32 does not match");
  }

  ParsedBlock block;
  ByteReader header(bytes.substr(kMagic.size(), kHeaderSize - kMagic.size()));
  const auto version = header.get<std::uint16_t>();
  if (version != kVersion) {
    throw StoreError(StoreErrc::kCorrupt,
                     "unsupported version " + std::to_string(version));
  }
  const auto layout = header.get<std::uint16_t>();
  if (layout != static_cast<std::uint16_t>(BlockLayout::kRequest) &&
      layout != static_cast<std::uint16_t>(BlockLayout::kImpression)) {
    throw StoreError(StoreErrc::kCorrupt, "unknown layout");
  }
  block.layout = static_cast<BlockLayout>(layout);
  block.sample_count = header.get<std::uint64_t>();

  ByteReader trailer(bytes.substr(bytes.size() - kTrailerSize, 12));
  const auto count = trailer.get<std::uint32_t>();
  const auto footer_offset = trailer.get<std::uint64_t>();
  if (footer_offset < kHeaderSize ||
      footer_offset + std::uint64_t{count} * kEntrySize + kTrailerSize !=
          bytes.size()) {
    throw StoreError(StoreErrc::kCorrupt, "footer does not fit the file");
  }
  ByteReader footer(bytes.substr(footer_offset, std::size_t{count} * kEntrySize));
  for (std::uint32_t i = 0; i < count; ++i) {
    ColumnInfo c;
    c.kind = static_cast<ColumnKind>(footer.get<std::uint32_t>());
    c.feature_id = footer.get<std::uint64_t>();
    c.offset = footer.get<std::uint64_t>();
    c.byte_length = footer.get<std::uint64_t>();
    if (c.offset < kHeaderSize || c.offset + c.byte_length > footer_offset) {
      throw StoreError(StoreErrc::kCorrupt, "column range out of bounds");
    }
    if (!block.columns
             .emplace(std::pair{c.kind, c.feature_id},
                      bytes.substr(c.offset, c.byte_length))
             .second) {
      throw StoreError(StoreErrc::kCorrupt, "duplicate column");
    }
    block.directory.push_back(c);
  }
  return block;
}

template <typename T>
std::vector<T> read_array(std::string_view col, std::uint64_t expected) {
  if (col.size() != expected * sizeof(T)) {
    throw StoreError(StoreErrc::kCorrupt,
                     "column holds " + std::to_string(col.size()) +
                         " bytes, expected " +
                         std::to_string(expected * sizeof(T)));
  }
  ByteReader r(col);
  std::vector<T> out(expected);
  for (auto& v : out) {
    if constexpr (std::is_same_v<T, float>) {
      v = r.get_f32();
    } else {
      v = r.get<T>();
    }
  }
  return out;
}

std::uint64_t sum_of(const std::vector<std::uint32_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

// Splits a flat array by lengths into consecutive chunks.
template <typename T>
std::vector<std::vector<T>> split(const std::vector<T>& flat,
                                  const std::vector<std::uint32_t>& lengths) {
  std::vector<std::vector<T>> out;
  out.reserve(lengths.size());
  std::size_t pos = 0;
  for (std::uint32_t n : lengths) {
    out.emplace_back(flat.begin() + pos, flat.begin() + pos + n);
    pos += n;
  }
  return out;
}

using FeatureSets = std::array<std::set<FeatureId>, 4>;

FeatureSets feature_sets(const RequestSample& s) {
  FeatureSets f;
  for (const auto& [id, _] : s.ro_dense) f[0].insert(id);
  for (const auto& [id, _] : s.ro_idlist) f[1].insert(id);
  for (const auto& [id, _] : s.nro_dense) f[2].insert(id);
  for (const auto& [id, _] : s.nro_idlist) f[3].insert(id);
  return f;
}

FeatureSets feature_sets(const ImpressionSample& s) {
  FeatureSets f;
  for (const auto& [id, _] : s.dense_features) f[0].insert(id);
  for (const auto& [id, _] : s.idlist_features) f[1].insert(id);
  for (const auto& [id, _] : s.idscorelist_features) f[2].insert(id);
  return f;
}

template <typename Sample>
FeatureSets common_features(const std::vector<Sample>& samples) {
  if (samples.empty()) return {};
  FeatureSets first = feature_sets(samples.front());
  for (const Sample& s : samples) {
    if (feature_sets(s) != first) {
      throw StoreError(StoreErrc::kMixedFeatures,
                       "request " + std::to_string(s.request_id) +
                           " carries a different feature set than request " +
                           std::to_string(samples.front().request_id));
    }
  }
  return first;
}

void write_labels(BlockBuilder& b, const std::vector<const std::vector<LabelId>*>& rows) {
  auto& lengths = b.column(ColumnKind::kConversionLengths);
  auto& labels = b.column(ColumnKind::kConversionLabels);
  for (const auto* row : rows) {
    lengths.put(checked_u32(row->size()));
    for (LabelId l : *row) labels.put(l);
  }
}

std::vector<std::vector<LabelId>> read_labels(const ParsedBlock& p,
                                              std::uint64_t rows) {
  auto lengths = read_array<std::uint32_t>(
      p.column(ColumnKind::kConversionLengths), rows);
  auto flat = read_array<std::uint32_t>(p.column(ColumnKind::kConversionLabels),
                                        sum_of(lengths));
  return split(flat, lengths);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreError(StoreErrc::kIo, "cannot open " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw StoreError(StoreErrc::kIo, "write failed: " + path.string());
}

}  // namespace

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(StoreErrc::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw StoreError(StoreErrc::kIo, "read failed: " + path.string());
  return bytes;
}

std::string encode_request_block(const std::vector<RequestSample>& samples) {
  for (const RequestSample& s : samples) {
    if (auto v = validate_request_sample(s); !v.empty()) {
      throw StoreError(StoreErrc::kInvalidSample, ValidationError(v).what());
    }
  }
  BlockBuilder b;
  if (samples.empty()) return b.finish(BlockLayout::kRequest, 0);
  const FeatureSets features = common_features(samples);

  auto& request_ids = b.column(ColumnKind::kRequestIds);
  auto& user_ids = b.column(ColumnKind::kUserIds);
  auto& ips = b.column(ColumnKind::kImpressionsPerSample);
  auto& items = b.column(ColumnKind::kItems);
  std::vector<const std::vector<LabelId>*> label_rows;
  for (const RequestSample& s : samples) {
    request_ids.put(s.request_id);
    user_ids.put(s.user_id);
    ips.put(checked_u32(s.items.size()));
    for (ItemId item : s.items) items.put(item);
    for (const auto& c : s.conversions) label_rows.push_back(&c);
  }
  write_labels(b, label_rows);

  for (FeatureId id : features[0]) {
    auto& col = b.column(ColumnKind::kRoDense, id);
    for (const RequestSample& s : samples) col.put_f32(s.ro_dense.at(id));
  }
  for (FeatureId id : features[1]) {
    auto& lengths = b.column(ColumnKind::kRoIdListLengths, id);
    auto& values = b.column(ColumnKind::kRoIdListValues, id);
    for (const RequestSample& s : samples) {
      const auto& ids = s.ro_idlist.at(id);
      lengths.put(checked_u32(ids.size()));
      for (auto v : ids) values.put(v);
    }
  }
  for (FeatureId id : features[2]) {
    auto& col = b.column(ColumnKind::kNroDense, id);
    for (const RequestSample& s : samples) {
      for (float v : s.nro_dense.at(id)) col.put_f32(v);
    }
  }
  for (FeatureId id : features[3]) {
    auto& lengths = b.column(ColumnKind::kNroIdListLengths, id);
    auto& values = b.column(ColumnKind::kNroIdListValues, id);
    for (const RequestSample& s : samples) {
      for (const auto& ids : s.nro_idlist.at(id)) {
        lengths.put(checked_u32(ids.size()));
        for (auto v : ids) values.put(v);
      }
    }
  }
  return b.finish(BlockLayout::kRequest, samples.size());
}

std::vector<RequestSample> decode_request_block(std::string_view bytes) {
  const ParsedBlock p = parse_block(bytes);
  if (p.layout != BlockLayout::kRequest) {
    throw StoreError(StoreErrc::kWrongLayout, "expected a request-layout block");
  }
  const std::uint64_t n = p.sample_count;
  if (n == 0) return {};

  auto request_ids = read_array<std::uint64_t>(p.column(ColumnKind::kRequestIds), n);
  auto user_ids = read_array<std::uint64_t>(p.column(ColumnKind::kUserIds), n);
  auto ips = read_array<std::uint32_t>(
      p.column(ColumnKind::kImpressionsPerSample), n);
  const std::uint64_t total = sum_of(ips);
  auto items = read_array<std::uint64_t>(p.column(ColumnKind::kItems), total);
  auto labels = read_labels(p, total);

  std::vector<RequestSample> out(n);
  std::size_t row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    RequestSample& s = out[i];
    s.request_id = request_ids[i];
    s.user_id = user_ids[i];
    s.items.assign(items.begin() + row, items.begin() + row + ips[i]);
    s.conversions.assign(labels.begin() + row, labels.begin() + row + ips[i]);
    row += ips[i];
  }

  for (FeatureId id : p.features(ColumnKind::kRoDense)) {
    auto values = read_array<float>(p.column(ColumnKind::kRoDense, id), n);
    for (std::size_t i = 0; i < n; ++i) out[i].ro_dense.emplace(id, values[i]);
  }
  for (FeatureId id : p.features(ColumnKind::kRoIdListLengths)) {
    auto lengths =
        read_array<std::uint32_t>(p.column(ColumnKind::kRoIdListLengths, id), n);
    auto flat = read_array<std::uint64_t>(
        p.column(ColumnKind::kRoIdListValues, id), sum_of(lengths));
    auto rows = split(flat, lengths);
    for (std::size_t i = 0; i < n; ++i) {
      out[i].ro_idlist.emplace(id, std::move(rows[i]));
    }
  }
  for (FeatureId id : p.features(ColumnKind::kNroDense)) {
    auto values = read_array<float>(p.column(ColumnKind::kNroDense, id), total);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i].nro_dense.emplace(
          id, std::vector<float>(values.begin() + pos,
                                 values.begin() + pos + ips[i]));
      pos += ips[i];
    }
  }
  for (FeatureId id : p.features(ColumnKind::kNroIdListLengths)) {
    auto lengths = read_array<std::uint32_t>(
        p.column(ColumnKind::kNroIdListLengths, id), total);
    auto flat = read_array<std::uint64_t>(
        p.column(ColumnKind::kNroIdListValues, id), sum_of(lengths));
    auto rows = split(flat, lengths);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::vector<std::uint64_t>> per_item(
          std::make_move_iterator(rows.begin() + pos),
          std::make_move_iterator(rows.begin() + pos + ips[i]));
      out[i].nro_idlist.emplace(id, std::move(per_item));
      pos += ips[i];
    }
  }
  return out;
}

std::string encode_impression_block(
    const std::vector<ImpressionSample>& samples) {
  BlockBuilder b;
  if (samples.empty()) return b.finish(BlockLayout::kImpression, 0);
  const FeatureSets features = common_features(samples);

  auto& request_ids = b.column(ColumnKind::kRequestIds);
  auto& user_ids = b.column(ColumnKind::kUserIds);
  auto& items = b.column(ColumnKind::kItems);
  std::vector<const std::vector<LabelId>*> label_rows;
  for (const ImpressionSample& s : samples) {
    request_ids.put(s.request_id);
    user_ids.put(s.user_id);
    items.put(s.item_id);
    label_rows.push_back(&s.conversions);
  }
  write_labels(b, label_rows);

  for (FeatureId id : features[0]) {
    auto& col = b.column(ColumnKind::kDense, id);
    for (const ImpressionSample& s : samples) {
      col.put_f32(s.dense_features.at(id));
    }
  }
  for (FeatureId id : features[1]) {
    auto& lengths = b.column(ColumnKind::kIdListLengths, id);
    auto& values = b.column(ColumnKind::kIdListValues, id);
    for (const ImpressionSample& s : samples) {
      const auto& ids = s.idlist_features.at(id);
      lengths.put(checked_u32(ids.size()));
      for (auto v : ids) values.put(v);
    }
  }
  for (FeatureId id : features[2]) {
    auto& lengths = b.column(ColumnKind::kIdScoreLengths, id);
    auto& keys = b.column(ColumnKind::kIdScoreKeys, id);
    auto& weights = b.column(ColumnKind::kIdScoreWeights, id);
    for (const ImpressionSample& s : samples) {
      const auto& scores = s.idscorelist_features.at(id);
      lengths.put(checked_u32(scores.size()));
      for (const auto& [k, w] : scores) {
        keys.put(k);
        weights.put_f32(w);
      }
    }
  }
  return b.finish(BlockLayout::kImpression, samples.size());
}

std::vector<ImpressionSample> decode_impression_block(std::string_view bytes) {
  const ParsedBlock p = parse_block(bytes);
  if (p.layout != BlockLayout::kImpression) {
    throw StoreError(StoreErrc::kWrongLayout,
                     "expected an impression-layout block");
  }
  const std::uint64_t n = p.sample_count;
  if (n == 0) return {};

  auto request_ids = read_array<std::uint64_t>(p.column(ColumnKind::kRequestIds), n);
  auto user_ids = read_array<std::uint64_t>(p.column(ColumnKind::kUserIds), n);
  auto items = read_array<std::uint64_t>(p.column(ColumnKind::kItems), n);
  auto labels = read_labels(p, n);

  std::vector<ImpressionSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].request_id = request_ids[i];
    out[i].user_id = user_ids[i];
    out[i].item_id = items[i];
    out[i].conversions = std::move(labels[i]);
  }
  for (FeatureId id : p.features(ColumnKind::kDense)) {
    auto values = read_array<float>(p.column(ColumnKind::kDense, id), n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i].dense_features.emplace(id, values[i]);
    }
  }
  for (FeatureId id : p.features(ColumnKind::kIdListLengths)) {
    auto lengths =
        read_array<std::uint32_t>(p.column(ColumnKind::kIdListLengths, id), n);
    auto flat = read_array<std::uint64_t>(p.column(ColumnKind::kIdListValues, id),
                                          sum_of(lengths));
    auto rows = split(flat, lengths);
    for (std::size_t i = 0; i < n; ++i) {
      out[i].idlist_features.emplace(id, std::move(rows[i]));
    }
  }
  for (FeatureId id : p.features(ColumnKind::kIdScoreLengths)) {
    auto lengths =
        read_array<std::uint32_t>(p.column(ColumnKind::kIdScoreLengths, id), n);
    const std::uint64_t total = sum_of(lengths);
    auto keys = read_array<std::uint64_t>(p.column(ColumnKind::kIdScoreKeys, id),
                                          total);
    auto weights =
        read_array<float>(p.column(ColumnKind::kIdScoreWeights, id), total);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& scores = out[i].idscorelist_features[id];
      for (std::uint32_t j = 0; j < lengths[i]; ++j, ++pos) {
        scores.emplace(keys[pos], weights[pos]);
      }
    }
  }
  return out;
}

std::vector<ColumnInfo> block_columns(std::string_view bytes) {
  return parse_block(bytes).directory;
}

BlockLayout block_layout(std::string_view bytes) {
  return parse_block(bytes).layout;
}

WriteSummary write_block(const std::vector<RequestSample>& samples,
                         const std::filesystem::path& path) {
  const std::string bytes = encode_request_block(samples);
  write_file(path, bytes);
  return {bytes.size(), samples.size()};
}

std::vector<RequestSample> read_block(const std::filesystem::path& path) {
  return decode_request_block(read_file_bytes(path));
}

WriteSummary write_impression_block(const std::vector<ImpressionSample>& samples,
                                    const std::filesystem::path& path) {
  const std::string bytes = encode_impression_block(samples);
  write_file(path, bytes);
  return {bytes.size(), samples.size()};
}

std::vector<ImpressionSample> read_impression_block(
    const std::filesystem::path& path) {
  return decode_impression_block(read_file_bytes(path));
}

FootprintReport measure_footprint(const std::vector<RequestSample>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("measure_footprint needs at least one sample");
  }
  const std::string roo = encode_request_block(samples);
  std::vector<ImpressionSample> expanded;
  for (const RequestSample& s : samples) {
    for (auto& imp : expand_request_sample(s)) expanded.push_back(std::move(imp));
  }
  const std::string imp = encode_impression_block(expanded);

  std::uint64_t per_request_bytes = 0;
  for (const ColumnInfo& c : block_columns(roo)) {
    switch (c.kind) {
      case ColumnKind::kRequestIds:
      case ColumnKind::kUserIds:
      case ColumnKind::kRoDense:
      case ColumnKind::kRoIdListLengths:
      case ColumnKind::kRoIdListValues:
        per_request_bytes += c.byte_length;
        break;
      default:
        break;
    }
  }

  FootprintReport r;
  r.sample_count = samples.size();
  r.impression_count = expanded.size();
  r.roo_bytes = roo.size();
  r.impression_bytes = imp.size();
  r.ro_byte_share =
      static_cast<double>(per_request_bytes) / static_cast<double>(r.roo_bytes);
  r.mean_impressions_per_request = static_cast<double>(r.impression_count) /
                                   static_cast<double>(r.sample_count);
  r.implied_volume_increase =
      static_cast<double>(r.impression_bytes) / static_cast<double>(r.roo_bytes) -
      1.0;
  return r;
}

IOReport expand_block(const std::filesystem::path& path,
                      const std::function<void(ImpressionSample&&)>& sink) {
  const std::string bytes = read_file_bytes(path);
  const std::vector<RequestSample> samples = decode_request_block(bytes);
  IOReport report;
  report.roo_io_bytes = bytes.size();
  report.samples_read = samples.size();

  std::vector<ImpressionSample> expanded;
  for (const RequestSample& s : samples) {
    for (auto& imp : expand_request_sample(s)) expanded.push_back(std::move(imp));
  }
  report.impression_io_bytes = encode_impression_block(expanded).size();
  report.impressions_emitted = expanded.size();
  for (auto& imp : expanded) sink(std::move(imp));
  return report;
}

std::vector<ImpressionSample> expand_block(const std::filesystem::path& path,
                                           IOReport* report) {
  std::vector<ImpressionSample> out;
  IOReport r = expand_block(path, [&out](ImpressionSample&& imp) {
    out.push_back(std::move(imp));
  });
  if (report != nullptr) *report = r;
  return out;
}

}  // namespace roo
