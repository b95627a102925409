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

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "hvreserve/boosting.hpp"
#include "hvreserve/error.hpp"
#include "hvreserve/simulator.hpp"
#include "hvreserve/training.hpp"
#include "test_util.hpp"

namespace hvr {
namespace {

using test::make_record;
using test::usd;

RevenueReport report(const char* high, const char* low, const char* rest) {
  RevenueReport r;
  r[Segment::effected_high_value].revenue = usd(high);
  r[Segment::effected_low_value].revenue = usd(low);
  r[Segment::uneffected].revenue = usd(rest);
  return r;
}

TEST(ComputeLift, ThreeSegmentExample) {
  const auto base = report("30626", "85753", "160761");
  const auto updated = report("40316", "85647", "160761");
  const auto lift = compute_lift(updated, base);
  EXPECT_EQ(base.total_revenue(), usd("277140"));
  EXPECT_EQ(lift.absolute_lift.ticks(), usd("9584").ticks());
  EXPECT_NEAR(lift.relative_lift * 100.0, 3.5, 0.05);
  EXPECT_DOUBLE_EQ(lift.relative_lift, 9584.0 / 277140.0);
  EXPECT_EQ(lift.segment_deltas[0].ticks(), usd("9690").ticks());
  EXPECT_EQ(lift.segment_deltas[1].ticks(), -usd("106").ticks());
  EXPECT_EQ(lift.segment_deltas[2].ticks(), 0);
  EXPECT_NE(lift.to_line().find("(3.5%)"), std::string::npos);
}

TEST(ComputeLift, TrivialCases) {
  const auto base = report("1", "2", "3");
  EXPECT_EQ(compute_lift(base, base).relative_lift, 0.0);
  EXPECT_EQ(compute_lift(report("2", "4", "6"), base).relative_lift, 1.0);
  EXPECT_THROW(compute_lift(base, report("0", "0", "0")), Error);
}

TEST(Synthetic, SameSeedSameLog) {
  SyntheticConfig c;
  c.n_records = 3000;
  c.seed = 7;
  const auto a = generate_synthetic_logs(c);
  const auto b = generate_synthetic_logs(c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    ASSERT_EQ(record_to_json(a.records[i]), record_to_json(b.records[i]));
  }
  EXPECT_EQ(group_map_to_json(a.groups), group_map_to_json(b.groups));
  c.seed = 8;
  EXPECT_NE(record_to_json(generate_synthetic_logs(c).records[0]), record_to_json(a.records[0]));
}

TEST(Synthetic, HighValueFractionAndShape) {
  SyntheticConfig c;
  c.n_records = 100000;
  c.seed = 5;
  const auto logs = generate_synthetic_logs(c);
  std::size_t hv = 0;
  Money hv_rev;
  Money total;
  for (const auto& r : logs.records) {
    ASSERT_GE(r.bids.top(), r.bids.second());
    ASSERT_LE(r.bids.top(), c.outlier_cap);
    if (r.bids.top() >= usd("10")) {
      ++hv;
      hv_rev += r.bids.top();
    }
    total += r.bids.top();
  }
  EXPECT_NEAR(static_cast<double>(hv) / c.n_records, 0.05, 0.005);
  const double share = static_cast<double>(hv_rev.ticks()) / static_cast<double>(total.ticks());
  EXPECT_GT(share, 0.2);
  EXPECT_LT(share, 0.6);
}

TEST(Synthetic, RejectsBadConfig) {
  SyntheticConfig c;
  c.high_value_fraction = 1.5;
  EXPECT_THROW(generate_synthetic_logs(c), Error);
  c = {};
  c.feature_signal_strength = -0.1;
  EXPECT_THROW(generate_synthetic_logs(c), Error);
}

TEST(Synthetic, NoSignalGivesChanceAuc) {
  SyntheticConfig c;
  c.n_records = 40000;
  c.seed = 13;
  c.feature_signal_strength = 0.0;
  const auto logs = generate_synthetic_logs(c);
  const auto split = split_records(logs.records, 1);
  TrainConfig tc;
  tc.cascade.params = {0.52, 0.95, 0.01};
  tc.cascade.max_stages = 3;
  tc.separation_rounds = 20;
  tc.bucket_rounds = 4;
  const auto trained = train_policy(split.train, split.validation, logs.groups, tc);
  const auto kept = filter_outliers(split.test, tc.buckets.outlier_cap).kept;
  const auto x = trained.models.encoding.encode_all(kept);
  const auto labels = label_records(kept, trained.models.buckets);
  std::vector<double> sep_scores(kept.size()), hv_scores(kept.size());
  std::vector<int> sep_y(kept.size()), hv_y(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    sep_scores[i] = strong_score(trained.models.separation, x.row(i));
    hv_scores[i] = cascade_score(trained.models.high_value, x.row(i));
    sep_y[i] = labels[i].separation;
    hv_y[i] = labels[i].high_value;
  }
  const double sep = roc_auc(sep_scores, sep_y);
  const double hv = roc_auc(hv_scores, hv_y);
  EXPECT_GE(sep, 0.45);
  EXPECT_LE(sep, 0.55);
  EXPECT_GE(hv, 0.45);
  EXPECT_LE(hv, 0.55);
}

std::vector<RawRecord> small_log() {
  std::vector<RawRecord> rs = {
      make_record("a", usd("5"), usd("2")),    make_record("b", usd("12"), usd("3")),
      make_record("c", usd("1"), usd("0.5")),  make_record("d", usd("25"), usd("24")),
      make_record("e", usd("0.04"), usd("0")), make_record("f", usd("11"), usd("1")),
  };
  rs[1].reserves.uniform = usd("4");
  rs[3].reserves.deal = usd("22");
  return rs;
}

TEST(Replay, BaselineClearsAtStaticReserve) {
  const auto rs = small_log();
  const auto rep = replay(rs);
  Money expected;
  for (const auto& r : rs) {
    expected += transaction_revenue(effective_static_reserve(r.reserves), r.bids).clearing_price;
  }
  EXPECT_EQ(rep.total_revenue(), expected);
  // 2 + 4 + 0.5 + 24 + 0 (blocked by 0.05) + 1
  EXPECT_EQ(rep.total_revenue(), usd("31.5"));
  EXPECT_EQ(rep[Segment::uneffected].auctions, rs.size());
  EXPECT_EQ(rep[Segment::uneffected].blocked, 1u);
}

TEST(Replay, OracleTakesTopBidOnScope) {
  const auto rs = small_log();
  const auto schema = BucketSchema::defaults();
  const auto paired = replay_paired(
      rs, [&](const RawRecord& r) { return oracle_decision(r, schema, OracleScope::separated_high_value); },
      {});
  // b (gap 9) and f (gap 10) are separated high-value; d has gap 1.
  EXPECT_EQ(paired.policy[Segment::effected_high_value].revenue, usd("23"));
  EXPECT_EQ(paired.policy[Segment::effected_high_value].auctions, 2u);
  EXPECT_EQ(paired.baseline[Segment::effected_high_value].revenue, usd("5"));
  const auto all = replay_paired(
      rs, [&](const RawRecord& r) { return oracle_decision(r, schema, OracleScope::all); }, {});
  Money sum_top;
  for (const auto& r : rs) {
    if (r.bids.top() > effective_static_reserve(r.reserves)) sum_top += r.bids.top();
  }
  EXPECT_EQ(all.policy.total_revenue(), sum_top);
}

TEST(Replay, BlockEverything) {
  const auto rs = small_log();
  const auto paired = replay_paired(
      rs,
      [](const RawRecord& r) {
        ReserveDecision d;
        d.static_reserve = effective_static_reserve(r.reserves);
        d.reserve = Money::unbounded();
        d.changed = true;
        d.reason = DecisionReason::applied;
        return d;
      },
      {});
  EXPECT_EQ(paired.policy.total_revenue(), Money{});
  std::size_t blocked = 0;
  for (const auto& l : paired.policy.segments) {
    EXPECT_EQ(l.blocked, l.auctions);
    blocked += l.blocked;
  }
  EXPECT_EQ(blocked, rs.size());
}

TEST(Replay, SampleRateIsHashBased) {
  SyntheticConfig c;
  c.n_records = 20000;
  c.seed = 3;
  auto rs = generate_synthetic_logs(c).records;
  ReplayOptions o;
  o.sample_rate = 0.1;
  o.sample_seed = 9;
  const auto a = replay(rs, o);
  EXPECT_NEAR(static_cast<double>(a.auctions()) / rs.size(), 0.1, 0.01);
  std::reverse(rs.begin(), rs.end());
  EXPECT_EQ(replay(rs, o), a);
  o.sample_rate = 0.0;
  EXPECT_THROW(replay(rs, o), Error);
}

// One trained policy shared by the property tests below.
struct Fixture {
  SyntheticLogs logs;
  DataSplit split;
  TrainedPolicy trained;
};

const Fixture& fixture() {
  static const std::unique_ptr<Fixture> f = [] {
    auto p = std::make_unique<Fixture>();
    SyntheticConfig c;
    c.n_records = 40000;
    c.seed = 21;
    c.feature_signal_strength = 0.8;
    p->logs = generate_synthetic_logs(c);
    p->split = split_records(p->logs.records, 4);
    TrainConfig tc;
    tc.cascade.params = {0.52, 0.95, 0.01};
    p->trained = train_policy(p->split.train, p->split.validation, p->logs.groups, tc);
    return p;
  }();
  return *f;
}

TEST(ReplayProperties, LedgerConservationAndNoHarm) {
  const auto& f = fixture();
  const auto paired = replay_paired(f.split.test, f.trained.models);
  Money policy_sum, base_sum, blocked_effected;
  for (std::size_t k = 0; k < paired.sampled.size(); ++k) {
    policy_sum += paired.policy_outcomes[k].clearing_price;
    base_sum += paired.baseline_outcomes[k].clearing_price;
    const auto& d = paired.decisions[k];
    if (!d.changed) {
      ASSERT_EQ(paired.policy_outcomes[k], paired.baseline_outcomes[k]);
      ASSERT_EQ(d.reserve, d.static_reserve);
    } else {
      ASSERT_GT(d.reserve, d.static_reserve);
      if (paired.policy_outcomes[k].blocked) {
        blocked_effected += paired.baseline_outcomes[k].clearing_price;
      }
    }
  }
  EXPECT_EQ(paired.policy.total_revenue(), policy_sum);
  EXPECT_EQ(paired.baseline.total_revenue(), base_sum);
  EXPECT_EQ(paired.policy[Segment::uneffected], paired.baseline[Segment::uneffected]);
  EXPECT_GE(paired.policy.total_revenue() + blocked_effected, paired.baseline.total_revenue());
  for (const auto& l : paired.policy.segments) EXPECT_EQ(l.sold + l.blocked, l.auctions);
  EXPECT_EQ(replay(f.split.test, f.trained.models), paired.policy);
}

TEST(ReplayProperties, OracleDominatesLearned) {
  const auto& f = fixture();
  const auto learned = replay_paired(f.split.test, f.trained.models);
  for (auto scope : {OracleScope::separated_high_value, OracleScope::high_value, OracleScope::all}) {
    const auto oracle = replay_paired(
        f.split.test,
        [&](const RawRecord& r) { return oracle_decision(r, f.trained.models.buckets, scope); }, {});
    EXPECT_EQ(oracle.baseline.total_revenue(), learned.baseline.total_revenue());
    if (scope != OracleScope::separated_high_value) {
      EXPECT_GE(oracle.policy.total_revenue(), learned.policy.total_revenue());
    }
  }
  EXPECT_GE(learned.policy.total_revenue(), Money{});
}

TEST(ReplayProperties, LambdaRaisesBlocking) {
  const auto& f = fixture();
  auto models = f.trained.models;
  std::size_t prev = 0;
  for (double lambda : {0.25, 0.5, 0.75, 0.9, 1.0}) {
    models.lambda = lambda;
    const auto rep = replay(f.split.test, models);
    std::size_t blocked = 0;
    for (const auto& l : rep.segments) blocked += l.blocked;
    EXPECT_GE(blocked, prev) << lambda;
    prev = blocked;
  }
}

TEST(GridSearch, SinglePointIsReturned) {
  const auto& f = fixture();
  TrainConfig tc;
  tc.cascade.params = {0.52, 0.95, 0.01};
  const std::vector<Money> hv = {usd("10")};
  const std::vector<Money> gap = {usd("2")};
  const auto res = grid_search_cutoffs(f.split, f.logs.groups, tc, hv, gap);
  ASSERT_EQ(res.cells.size(), 1u);
  ASSERT_TRUE(res.best.has_value());
  EXPECT_EQ(*res.best, 0u);
  const auto again = evaluate_grid_point(f.split, f.logs.groups, tc, usd("10"), usd("2"));
  EXPECT_EQ(again.absolute_lift, res.cells[0].absolute_lift);
  EXPECT_EQ(again.effected, res.cells[0].effected);
}

TEST(GridSearch, CutoffAboveCapIsSkipped) {
  const auto& f = fixture();
  TrainConfig tc;
  tc.cascade.params = {0.52, 0.95, 0.01};
  tc.cascade.max_stages = 2;
  const std::vector<Money> hv = {usd("50")};
  const std::vector<Money> gap = {usd("2")};
  const auto res = grid_search_cutoffs(f.split, f.logs.groups, tc, hv, gap);
  ASSERT_EQ(res.cells.size(), 1u);
  EXPECT_TRUE(res.cells[0].skipped);
  EXPECT_FALSE(res.cells[0].diagnostic.empty());
  EXPECT_FALSE(res.best.has_value());
  EXPECT_EQ(res.to_csv(), "hv_cutoff,gap_cutoff,lift,effected_count\n");
  EXPECT_THROW(grid_search_cutoffs(f.split, f.logs.groups, tc, {}, gap), Error);
}

TEST(Splits, HashAssignmentIsStableAndDisjoint) {
  const auto& f = fixture();
  EXPECT_EQ(f.split.train.size() + f.split.validation.size() + f.split.test.size(),
            f.logs.records.size());
  const double n = static_cast<double>(f.logs.records.size());
  EXPECT_NEAR(f.split.train.size() / n, 0.5, 0.02);
  EXPECT_NEAR(f.split.validation.size() / n, 0.2, 0.02);
  for (const auto& r : f.split.test) {
    EXPECT_EQ(assign_split(r.record_id, 4, 0.5, 0.2), Split::test);
  }
  EXPECT_EQ(unit_hash("x", 1), unit_hash("x", 1));
  EXPECT_NE(unit_hash("x", 1), unit_hash("x", 2));
}

}  // namespace
}  // namespace hvr
