// Copyright 2026 The hvreserve Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "hvreserve/error.hpp"
#include "hvreserve/policy.hpp"
#include "hvreserve/simulator.hpp"
#include "hvreserve/training.hpp"
#include "test_util.hpp"

namespace hvr {
namespace {

using test::make_record;
using test::usd;

std::size_t column(const EncodingSchema& e, const std::string& name) {
  const auto names = e.feature_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::runtime_error("no column " + name);
  return static_cast<std::size_t>(it - names.begin());
}

StrongClassifier single(const EncodingSchema& e, const std::string& feature, double threshold,
                        double alpha) {
  StrongClassifier c;
  c.stages.push_back({alpha, {column(e, feature), threshold, 1}});
  c.schema_id = e.id();
  c.dimension = e.dimension();
  return c;
}

// Constant-score classifier: the stump always fires.
StrongClassifier constant(const EncodingSchema& e, double score) {
  return single(e, "page_views", -std::numeric_limits<double>::infinity(), score);
}

// Separation passes when page_views >= 10, the cascade when clicks >= 1; the
// bucket scores are fixed per bucket.
PolicyModels hand_built(const std::vector<double>& bucket_scores) {
  std::vector<RawRecord> corpus = {make_record("a", usd("3"), usd("1")),
                                   make_record("b", usd("12"), usd("2"))};
  PolicyModels m;
  m.encoding = EncodingSchema::fit(corpus, BuyerGroupMap{});
  m.buckets = BucketSchema::defaults();
  m.separation = single(m.encoding, "page_views", 10, 1.0);
  StrongClassifier stage = single(m.encoding, "clicks", 1, 1.0);
  m.high_value.stages.push_back(stage);
  m.high_value.stage_rates.push_back({});
  m.high_value.params = {0.5, 0.9, 0.01};
  m.bucket_predictor.first_bucket = m.buckets.first_high_value_bucket();
  for (double s : bucket_scores) m.bucket_predictor.classifiers.emplace_back(constant(m.encoding, s));
  m.validate();
  return m;
}

RawRecord candidate(Money top, Money second, std::int64_t page_views, std::int64_t clicks) {
  auto r = make_record("r", top, second);
  r.page_views = page_views;
  r.clicks = clicks;
  return r;
}

TEST(PredictTopBucket, CraftedScoresPickArgmax) {
  const auto m = hand_built({0.2, 0.9, 0.1});
  const auto x = m.encoding.encode(candidate(usd("12"), usd("1"), 20, 3));
  EXPECT_EQ(predict_top_bucket(m, x.values), m.bucket_predictor.first_bucket + 1);
}

TEST(PredictTopBucket, DominantBucketWins) {
  const auto m = hand_built({0.1, 0.2, 3.0});
  const auto x = m.encoding.encode(candidate(usd("12"), usd("1"), 20, 3));
  EXPECT_EQ(predict_top_bucket(m, x.values), m.bucket_predictor.first_bucket + 2);
}

TEST(PredictTopBucket, TieGoesToLowerBucket) {
  const auto m = hand_built({0.7, 0.7, 0.1});
  const auto x = m.encoding.encode(candidate(usd("12"), usd("1"), 20, 3));
  const auto b = predict_top_bucket(m, x.values);
  EXPECT_EQ(b, m.bucket_predictor.first_bucket);
  EXPECT_EQ(bucket_floor(b, m.buckets), usd("10"));
}

TEST(PredictTopBucket, EmptySlotIsNeverChosen) {
  auto m = hand_built({0.2, 0.9, 0.1});
  m.bucket_predictor.classifiers[1].reset();
  const auto x = m.encoding.encode(candidate(usd("12"), usd("1"), 20, 3));
  EXPECT_EQ(predict_top_bucket(m, x.values), m.bucket_predictor.first_bucket);
}

TEST(BucketFloor, Examples) {
  const auto s = BucketSchema::defaults();
  EXPECT_EQ(bucket_floor(s.bucket_of(usd("12")), s), usd("10"));
  EXPECT_EQ(bucket_floor(0, s), usd("0"));
  EXPECT_EQ(bucket_floor(s.bucket_count() - 1, s), usd("20"));
  EXPECT_THROW(bucket_floor(s.bucket_count(), s), Error);
}

TEST(RecommendReserve, SeparationNegativeLeavesStatic) {
  const auto m = hand_built({0.9, 0.2, 0.1});
  const auto d = recommend_reserve(candidate(usd("12"), usd("1"), 2, 3), m);
  EXPECT_FALSE(d.changed);
  EXPECT_EQ(d.reason, DecisionReason::not_separated);
  EXPECT_EQ(d.reserve, d.static_reserve);
  EXPECT_FALSE(d.predicted_bucket.has_value());
}

TEST(RecommendReserve, CascadeNegativeLeavesStatic) {
  const auto m = hand_built({0.9, 0.2, 0.1});
  const auto d = recommend_reserve(candidate(usd("12"), usd("1"), 20, 0), m);
  EXPECT_FALSE(d.changed);
  EXPECT_EQ(d.reason, DecisionReason::not_high_value);
}

TEST(RecommendReserve, AppliesBucketFloor) {
  const auto m = hand_built({0.9, 0.2, 0.1});
  auto r = candidate(usd("12"), usd("1"), 20, 3);
  r.reserves = {usd("0.05"), std::nullopt, std::nullopt};
  const auto d = recommend_reserve(r, m);
  EXPECT_TRUE(d.changed);
  EXPECT_EQ(d.reason, DecisionReason::applied);
  EXPECT_EQ(d.reserve, usd("10"));
  EXPECT_EQ(d.static_reserve, usd("0.05"));
  EXPECT_LE(d.reserve, r.bids.top());
}

TEST(RecommendReserve, FloorDominatedByStatic) {
  // A bucket schema with the cutoff at 1 so the predicted floor can be 1.00.
  auto m = hand_built({0.9, 0.2, 0.1});
  m.buckets.high_value_cutoff = usd("1");
  m.bucket_predictor.first_bucket = m.buckets.first_high_value_bucket();
  m.bucket_predictor.classifiers.clear();
  m.bucket_predictor.classifiers.emplace_back(constant(m.encoding, 5.0));
  for (std::size_t k = 1; k + m.bucket_predictor.first_bucket < m.buckets.bucket_count(); ++k) {
    m.bucket_predictor.classifiers.emplace_back(constant(m.encoding, 0.1));
  }
  m.validate();
  auto r = candidate(usd("12"), usd("1"), 20, 3);
  r.reserves = {usd("0.05"), usd("2.50"), std::nullopt};
  const auto d = recommend_reserve(r, m);
  EXPECT_EQ(d.predicted_bucket, m.buckets.bucket_of(usd("1")));
  EXPECT_FALSE(d.changed);
  EXPECT_EQ(d.reason, DecisionReason::bucket_floor_not_above_static);
  EXPECT_EQ(d.reserve, usd("2.50"));
}

TEST(RecommendReserve, LambdaScalesIntoBucket) {
  auto m = hand_built({0.9, 0.2, 0.1});
  m.lambda = 0.5;
  const auto d = recommend_reserve(candidate(usd("12"), usd("1"), 20, 3), m);
  EXPECT_EQ(d.reserve, usd("5"));
  m.lambda = 0.0;
  EXPECT_THROW(m.validate(), Error);
  m.lambda = 1.5;
  EXPECT_THROW(m.validate(), Error);
}

TEST(RecommendReserve, SchemaMismatchThrows) {
  const auto m = hand_built({0.9, 0.2, 0.1});
  const std::vector<double> wrong(m.encoding.dimension() + 1, 0.0);
  EXPECT_THROW(recommend_reserve(candidate(usd("12"), usd("1"), 20, 3), wrong, m), Error);
}

TEST(RecommendReserve, ShortCircuitsByCounters) {
  const auto m = hand_built({0.9, 0.2, 0.1});
  PolicyCounters c;
  recommend_reserve(candidate(usd("12"), usd("1"), 2, 3), m, &c);
  EXPECT_EQ(c.separation_evaluations, 1u);
  EXPECT_EQ(c.cascade_evaluations, 0u);
  EXPECT_EQ(c.bucket_evaluations, 0u);
  recommend_reserve(candidate(usd("12"), usd("1"), 20, 0), m, &c);
  EXPECT_EQ(c.cascade_evaluations, 1u);
  EXPECT_EQ(c.bucket_evaluations, 0u);
  recommend_reserve(candidate(usd("12"), usd("1"), 20, 3), m, &c);
  EXPECT_EQ(c.separation_evaluations, 3u);
  EXPECT_EQ(c.cascade_evaluations, 2u);
  EXPECT_EQ(c.bucket_evaluations, 1u);
}

TEST(RecommendReserve, ChangedFlagMatchesReserve) {
  const auto m = hand_built({0.9, 0.2, 0.1});
  for (std::int64_t pv : {0, 15}) {
    for (std::int64_t clicks : {0, 2}) {
      for (const char* stat : {"0.05", "9.99", "10", "30"}) {
        auto r = candidate(usd("40"), usd("1"), pv, clicks);
        r.reserves = {usd(stat), std::nullopt, std::nullopt};
        const auto d = recommend_reserve(r, m);
        if (d.changed) {
          EXPECT_GT(d.reserve, d.static_reserve);
        } else {
          EXPECT_EQ(d.reserve, d.static_reserve);
        }
      }
    }
  }
}

TEST(RecommendReserve, CorrectBucketNeverBlocks) {
  SyntheticConfig c;
  c.n_records = 20000;
  c.seed = 11;
  const auto logs = generate_synthetic_logs(c);
  const auto split = split_records(logs.records, 2);
  TrainConfig tc;
  tc.cascade.params = {0.52, 0.95, 0.01};
  tc.separation_rounds = 10;
  tc.bucket_rounds = 8;
  const auto trained = train_policy(split.train, split.validation, logs.groups, tc);
  std::size_t checked = 0;
  for (const auto& r : split.test) {
    const auto d = recommend_reserve(r, trained.models);
    if (!d.predicted_bucket) continue;
    if (trained.models.buckets.bucket_of(r.bids.top()) != *d.predicted_bucket) continue;
    ++checked;
    EXPECT_LE(d.reserve, r.bids.top());
    EXPECT_FALSE(transaction_revenue(d.reserve, r.bids).blocked);
  }
  EXPECT_GT(checked, 0u);
}

TEST(PolicyJson, RoundTrip) {
  auto m = hand_built({0.2, 0.9, 0.1});
  m.bucket_predictor.classifiers[2].reset();
  const auto text = policy_to_json(m);
  const auto back = policy_from_json(text);
  EXPECT_EQ(policy_to_json(back), text);
  EXPECT_EQ(back.bucket_predictor, m.bucket_predictor);
  EXPECT_EQ(back.high_value, m.high_value);
  EXPECT_EQ(back.separation, m.separation);
}

TEST(PolicyJson, RejectsForeignSchema) {
  auto m = hand_built({0.2, 0.9, 0.1});
  m.separation.schema_id = "something-else";
  EXPECT_THROW(policy_from_json(policy_to_json(m)), Error);
  EXPECT_THROW(policy_from_json("{\"format\":\"other\"}"), Error);
  EXPECT_THROW(policy_from_json("not json"), Error);
}

TEST(DecisionCsv, QuotesAwkwardIds) {
  ReserveDecision d;
  d.static_reserve = usd("0.05");
  d.reserve = usd("10");
  d.changed = true;
  d.reason = DecisionReason::applied;
  d.predicted_bucket = 4;
  d.separation_margin = 0.5;
  d.cascade_passed = true;
  EXPECT_EQ(decision_csv_row("id1", d), "id1,applied,0.0500,10.0000,4,0.5,1");
  EXPECT_EQ(decision_csv_row("a,b", d).substr(0, 6), "\"a,b\",");
  EXPECT_EQ(decision_csv_row("say \"x\"", d).substr(0, 12), "\"say \"\"x\"\"\",");
  const auto header = decision_csv_header();
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 6);
}

}  // namespace
}  // namespace hvr
