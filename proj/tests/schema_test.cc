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


#include <random>

#include <doctest.h>

#include "roo/jsonl.h"
#include "roo/schema.h"
#include "test_util.h"

using namespace roo;
using roo::testing::make_registry;
using roo::testing::random_sample;

namespace {

RequestSample three_items() {
  RequestSample s;
  s.request_id = 10;
  s.user_id = 1;
  s.items = {7, 9, 11};
  s.conversions = {{}, {1}, {1, 2}};
  s.ro_dense = {{1, 0.5f}};
  s.ro_idlist = {{100, {3, 4}}};
  s.nro_dense = {{200, {1.0f, 2.0f, 3.0f}}};
  s.nro_idlist = {{300, {{1}, {}, {2, 3}}}};
  return s;
}

FeatureRegistry three_items_registry() {
  FeatureRegistry r;
  r.add(FeatureKind::kRoDense, 1);
  r.add(FeatureKind::kRoIdList, 100);
  r.add(FeatureKind::kNroDense, 200);
  r.add(FeatureKind::kNroIdList, 300);
  return r;
}

}  // namespace

TEST_CASE("registry keeps the four groups disjoint") {
  FeatureRegistry r = three_items_registry();
  CHECK(r.kind_of(1) == FeatureKind::kRoDense);
  CHECK(r.kind_of(300) == FeatureKind::kNroIdList);
  CHECK_FALSE(r.kind_of(5).has_value());
  CHECK_THROWS_AS(r.add(FeatureKind::kNroDense, 1), std::invalid_argument);
  CHECK(is_request_only(FeatureKind::kRoIdList));
  CHECK_FALSE(is_request_only(FeatureKind::kNroDense));
}

TEST_CASE("aligned sample validates clean") {
  CHECK(validate_request_sample(three_items(), three_items_registry()).empty());
  CHECK(validate_request_sample(three_items()).empty());
}

TEST_CASE("short item-side column is one violation") {
  RequestSample s = three_items();
  s.nro_dense[200].pop_back();
  const auto v = validate_request_sample(s, three_items_registry());
  REQUIRE(v.size() == 1);
  CHECK(v[0].request_id == 10);
  CHECK(v[0].describe().find("200") != std::string::npos);
}

TEST_CASE("request-only list using an item-side id is one registry violation") {
  RequestSample s = three_items();
  s.ro_idlist[300] = {5};
  CHECK(validate_request_sample(s, three_items_registry()).size() == 1);
}

TEST_CASE("structural violations") {
  RequestSample s = three_items();
  SUBCASE("no items") {
    s.items.clear();
    s.conversions.clear();
    s.nro_dense.clear();
    s.nro_idlist.clear();
    CHECK_FALSE(validate_request_sample(s).empty());
  }
  SUBCASE("duplicate item") {
    s.items[2] = 7;
    CHECK_FALSE(validate_request_sample(s).empty());
  }
  SUBCASE("conversions misaligned") {
    s.conversions.pop_back();
    CHECK_FALSE(validate_request_sample(s).empty());
  }
  SUBCASE("labels out of order") {
    s.conversions[2] = {2, 1};
    CHECK_FALSE(validate_request_sample(s).empty());
  }
  SUBCASE("duplicate label") {
    s.conversions[2] = {1, 1};
    CHECK_FALSE(validate_request_sample(s).empty());
  }
  SUBCASE("unregistered feature") {
    s.ro_dense[77] = 1.0f;
    CHECK_FALSE(validate_request_sample(s, three_items_registry()).empty());
  }
}

TEST_CASE("expansion copies request-only and slices item-side features") {
  RequestSample s;
  s.request_id = 3;
  s.user_id = 4;
  s.items = {7, 9};
  s.conversions = {{}, {1}};
  s.ro_dense = {{1, 0.5f}};
  s.nro_dense = {{2, {1.0f, 2.0f}}};
  const auto out = expand_request_sample(s);
  REQUIRE(out.size() == 2);
  CHECK(out[0].item_id == 7);
  CHECK(out[1].item_id == 9);
  CHECK(out[0].dense_features == DenseMap{{1, 0.5f}, {2, 1.0f}});
  CHECK(out[1].dense_features == DenseMap{{1, 0.5f}, {2, 2.0f}});
  CHECK(out[1].conversions == std::vector<LabelId>{1});
  CHECK(out[0].user_id == 4);
}

TEST_CASE("single-item expansion keeps every value") {
  RequestSample s = three_items();
  s.items = {7};
  s.conversions = {{1}};
  s.nro_dense = {{200, {2.5f}}};
  s.nro_idlist = {{300, {{8, 9}}}};
  const auto out = expand_request_sample(s, three_items_registry());
  REQUIRE(out.size() == 1);
  CHECK(out[0].dense_features == DenseMap{{1, 0.5f}, {200, 2.5f}});
  CHECK(out[0].idlist_features == IdListMap{{100, {3, 4}}, {300, {8, 9}}});
  CHECK(group_impressions(out, three_items_registry()) ==
        std::vector<RequestSample>{s});
}

TEST_CASE("expansion of an invalid sample throws") {
  RequestSample s = three_items();
  s.conversions.pop_back();
  CHECK_THROWS_AS(expand_request_sample(s), ValidationError);
}

TEST_CASE("expand then group is the identity") {
  std::mt19937_64 rng(5);
  const FeatureRegistry reg = make_registry({});
  for (int i = 0; i < 200; ++i) {
    const RequestSample s = random_sample(rng, reg, 1 + i, 1 + rng() % 7);
    const auto expanded = expand_request_sample(s, reg);
    CHECK(expanded.size() == s.items.size());
    const auto grouped = group_impressions(expanded, reg);
    REQUIRE(grouped.size() == 1);
    CHECK(to_json_line(grouped[0]) == to_json_line(s));
  }
}

TEST_CASE("grouping rejects disagreeing request-only features") {
  auto imps = expand_request_sample(three_items(), three_items_registry());
  imps[1].dense_features[1] = 0.75f;
  CHECK_THROWS_AS(group_impressions(imps, three_items_registry()), ValidationError);
}

TEST_CASE("json lines round trip") {
  std::mt19937_64 rng(9);
  const FeatureRegistry reg = make_registry({});
  for (int i = 0; i < 50; ++i) {
    const RequestSample s = random_sample(rng, reg, 1 + i, 1 + rng() % 5);
    CHECK(request_sample_from_json(to_json_line(s)) == s);
    for (const auto& imp : expand_request_sample(s)) {
      CHECK(impression_sample_from_json(to_json_line(imp)) == imp);
    }
  }
  ImpressionSample scored;
  scored.request_id = 1;
  scored.item_id = 2;
  scored.idscorelist_features = {{9, {{4, 0.25f}, {5, -1.5f}}}};
  CHECK(impression_sample_from_json(to_json_line(scored)) == scored);
  const Event e = roo::testing::impression(5, 1, 2, 3, 4);
  CHECK(event_from_json(to_json_line(e)) == e);
}

TEST_CASE("floats serialise as shortest round-trip text") {
  RequestSample s = three_items();
  s.ro_dense[1] = 0.1f;
  CHECK(to_json_line(s).find("\"1\":0.1}") != std::string::npos);
  CHECK(request_sample_from_json(to_json_line(s)).ro_dense.at(1) == 0.1f);
}

TEST_CASE("malformed json is a parse error") {
  CHECK_THROWS_AS(request_sample_from_json("{"), ParseError);
  CHECK_THROWS_AS(request_sample_from_json("{\"request_id\": 1}"), ParseError);
  CHECK_THROWS_AS(event_from_json("{\"event_time\":1,\"user_id\":1,\"request_id\":1,"
                                  "\"item_id\":1,\"kind\":\"click\"}"),
                  ParseError);
}

TEST_CASE("conversion events carry labels and no payload") {
  Event c = roo::testing::conversion(1, 1, 1, 1, 1);
  CHECK(check_event(c).empty());
  c.item_labels.clear();
  CHECK_FALSE(check_event(c).empty());
  c = roo::testing::conversion(1, 1, 1, 1, 1);
  c.ro_dense[1] = 1.0f;
  CHECK_FALSE(check_event(c).empty());
  Event i = roo::testing::impression(1, 1, 1, 1);
  i.item_labels = {1};
  CHECK_FALSE(check_event(i).empty());
}
