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


#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "roo/store.h"
#include "test_util.h"

using namespace roo;
using roo::testing::make_registry;
using roo::testing::random_samples;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "roo_store_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Samples whose request-only part is `ro_ids` ids and item-side part
// `nro_ids` ids per item, no labels, so bytes are known exactly.
std::vector<RequestSample> sized_corpus(std::size_t n, std::uint32_t k, std::size_t ro_ids,
                                        std::size_t nro_ids) {
  std::vector<RequestSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    RequestSample s;
    s.request_id = i + 1;
    s.user_id = i % 97 + 1;
    s.ro_idlist[100] = std::vector<std::uint64_t>(ro_ids, 3);
    for (std::uint32_t j = 0; j < k; ++j) {
      s.items.push_back(j + 1);
      s.conversions.push_back({});
      s.nro_idlist[300].push_back(std::vector<std::uint64_t>(nro_ids, 5));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Per-sample user bytes: request id, user id, one list length and its ids.
double user_bytes(std::size_t ro_ids) { return 8 + 8 + 4 + 8.0 * ro_ids; }
// Per-item bytes: item id, label count, one list length and its ids.
double item_bytes(std::size_t nro_ids) { return 8 + 4 + 4 + 8.0 * nro_ids; }

double analytic_increase(double k, double u, double v) {
  return k * (u + v) / (u + k * v) - 1.0;
}

}  // namespace

TEST_CASE("request blocks round trip byte-exactly") {
  std::mt19937_64 rng(11);
  const FeatureRegistry reg = make_registry({});
  const auto samples = random_samples(rng, reg, 1000, 1, 7);
  const std::string bytes = encode_request_block(samples);
  const auto decoded = decode_request_block(bytes);
  CHECK(decoded == samples);
  CHECK(encode_request_block(decoded) == bytes);
  CHECK(block_layout(bytes) == BlockLayout::kRequest);
}

TEST_CASE("impression blocks round trip") {
  std::mt19937_64 rng(12);
  const FeatureRegistry reg = make_registry({});
  std::vector<ImpressionSample> imps;
  for (const auto& s : random_samples(rng, reg, 100, 1, 5)) {
    for (auto& i : expand_request_sample(s)) imps.push_back(std::move(i));
  }
  imps[0].idscorelist_features[9] = {{1, 0.5f}};
  for (auto& i : imps) i.idscorelist_features[9];
  const std::string bytes = encode_impression_block(imps);
  CHECK(decode_impression_block(bytes) == imps);
  CHECK(block_layout(bytes) == BlockLayout::kImpression);
  CHECK_THROWS_AS(decode_request_block(bytes), StoreError);
}

TEST_CASE("empty and single-item blocks") {
  const std::string empty = encode_request_block({});
  CHECK(decode_request_block(empty).empty());
  CHECK(block_columns(empty).empty());
  std::mt19937_64 rng(1);
  const auto one = random_samples(rng, make_registry({}), 1, 1, 1);
  CHECK(decode_request_block(encode_request_block(one)) == one);
}

TEST_CASE("files round trip and write deterministically") {
  std::mt19937_64 rng(13);
  const auto samples = random_samples(rng, make_registry({}), 100, 1, 6);
  const auto a = temp_path("a.roo");
  const auto b = temp_path("b.roo");
  const WriteSummary w = write_block(samples, a);
  write_block(samples, b);
  CHECK(w.sample_count == 100);
  CHECK(w.bytes_written == std::filesystem::file_size(a));
  CHECK(read_block(a) == samples);
  CHECK(read_file_bytes(a) == read_file_bytes(b));
}

TEST_CASE("corruption errors are distinct") {
  std::mt19937_64 rng(14);
  const std::string good = encode_request_block(random_samples(rng, make_registry({}), 20, 1, 4));
  auto code_of = [](const std::string& bytes) {
    try {
      decode_request_block(bytes);
    } catch (const StoreError& e) {
      return e.code();
    }
    FAIL("expected a StoreError");
    return StoreErrc::kIo;
  };
  std::string flipped = good;
  flipped[40] ^= 0x5A;
  CHECK(code_of(flipped) == StoreErrc::kChecksumMismatch);
  CHECK(code_of(good.substr(0, good.size() - 7)) == StoreErrc::kTruncated);
  CHECK(code_of(good.substr(0, 10)) == StoreErrc::kTruncated);
  std::string magic = good;
  magic[0] = 'X';
  CHECK(code_of(magic) == StoreErrc::kBadMagic);
  CHECK_THROWS_AS(read_block(temp_path("does-not-exist.roo")), StoreError);
}

TEST_CASE("blocks reject mixed feature sets and invalid samples") {
  std::mt19937_64 rng(15);
  auto samples = random_samples(rng, make_registry({}), 3, 2, 2);
  samples[2].ro_dense[55] = 1.0f;
  try {
    encode_request_block(samples);
    FAIL("expected mixed features");
  } catch (const StoreError& e) {
    CHECK(e.code() == StoreErrc::kMixedFeatures);
  }
  samples = random_samples(rng, make_registry({}), 3, 2, 2);
  samples[1].conversions.pop_back();
  CHECK_THROWS_AS(encode_request_block(samples), StoreError);
}

TEST_CASE("footprint follows the u,v byte model") {
  // k = 4, request-only bytes three times the per-item bytes.
  const std::size_t nro_ids = 6;
  const double v = item_bytes(nro_ids);
  const std::size_t ro_ids = static_cast<std::size_t>((3 * v - 20) / 8);
  const double u = user_bytes(ro_ids);
  CHECK(std::abs(u / v - 3.0) < 0.1);
  const auto r = measure_footprint(sized_corpus(1000, 4, ro_ids, nro_ids));
  const double expected = analytic_increase(4, u, v);
  CHECK(std::abs(expected - 16.0 / 7.0 + 1.0) < 0.05);
  CHECK(std::abs(r.implied_volume_increase - expected) <= 0.05 * expected);
  CHECK(r.mean_impressions_per_request == 4.0);
  CHECK(r.ro_byte_share > 0.0);
  CHECK(r.ro_byte_share < 1.0);
}

TEST_CASE("single-item corpora differ only by the fanout column") {
  // The request layout adds one u32 per sample plus one 28-byte directory
  // entry for impressions_per_sample; everything else is identical.
  const auto r = measure_footprint(sized_corpus(1000, 1, 10, 4));
  CHECK(r.roo_bytes - r.impression_bytes == 4 * 1000 + 28);
  CHECK(std::abs(r.implied_volume_increase) < 0.03);
  CHECK_THROWS_AS(measure_footprint({}), std::invalid_argument);
}

TEST_CASE("expand_block streams the expansion and reports IO bytes") {
  std::mt19937_64 rng(16);
  const auto samples = random_samples(rng, make_registry({}), 50, 1, 7);
  const auto path = temp_path("expand.roo");
  write_block(samples, path);
  IOReport io;
  const auto imps = expand_block(path, &io);
  std::vector<ImpressionSample> expected;
  for (const auto& s : samples) {
    for (auto& i : expand_request_sample(s)) expected.push_back(std::move(i));
  }
  CHECK(imps == expected);
  CHECK(io.samples_read == 50);
  CHECK(io.impressions_emitted == expected.size());
  CHECK(io.roo_io_bytes == std::filesystem::file_size(path));
  CHECK(io.impression_io_bytes == encode_impression_block(expected).size());
}

TEST_CASE("heavy request-only corpora read far fewer bytes") {
  // k = 7 with the request-only share of the block near 0.85.
  const auto samples = sized_corpus(500, 7, 400, 6);
  const auto path = temp_path("heavy.roo");
  write_block(samples, path);
  IOReport io;
  expand_block(path, &io);
  CHECK(measure_footprint(samples).ro_byte_share > 0.8);
  CHECK(static_cast<double>(io.impression_io_bytes) / io.roo_io_bytes > 3.0);
}

TEST_CASE("expansion is independent of block boundaries") {
  std::mt19937_64 rng(17);
  const auto samples = random_samples(rng, make_registry({}), 40, 1, 5);
  const auto whole = temp_path("whole.roo");
  write_block(samples, whole);
  std::vector<ImpressionSample> pieces;
  for (std::size_t b = 0; b < samples.size(); b += 7) {
    const auto path = temp_path("piece.roo");
    write_block({samples.begin() + b, samples.begin() + std::min(samples.size(), b + 7)},
                path);
    for (auto& i : expand_block(path)) pieces.push_back(std::move(i));
  }
  CHECK(pieces == expand_block(whole));
}
