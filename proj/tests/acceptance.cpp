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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <boost/rational.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hvreserve/auction.hpp"
#include "hvreserve/boosting.hpp"
#include "hvreserve/cascade.hpp"
#include "hvreserve/error.hpp"
#include "hvreserve/policy.hpp"
#include "hvreserve/simulator.hpp"
#include "hvreserve/training.hpp"

namespace {

using namespace hvr;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;
std::map<int, std::string> lines;

void report(int id, const char* name, const Outcome& o, const std::string& summary) {
  char head[96];
  std::snprintf(head, sizeof head, "criterion %d %-24s %s  ", id, name, o.pass ? "PASS" : "FAIL");
  lines[id] = head + (o.pass ? summary : o.detail);
  std::fprintf(stderr, "  %s\n", lines[id].c_str());
  if (!o.pass) ++failures;
}

// ---------------------------------------------------------------------------

void revenue_function() {
  const auto t0 = Clock::now();
  Outcome o;
  const BidPair worked(Money::parse("5"), Money::parse("2"));
  for (const char* r : {"0", "1", "1.9999"}) {
    o.check(transaction_revenue(Money::parse(r), worked).clearing_price == Money::parse("2"),
            std::string("worked example below 2 at r=") + r);
  }
  for (const char* r : {"2", "3", "4.5", "5"}) {
    o.check(transaction_revenue(Money::parse(r), worked).clearing_price == Money::parse(r),
            std::string("worked example inside [2,5] at r=") + r);
  }
  for (const char* r : {"5.0001", "6", "100"}) {
    const auto out = transaction_revenue(Money::parse(r), worked);
    o.check(!out.sold && out.clearing_price.is_zero(), std::string("worked example above 5 at r=") + r);
  }
  std::size_t triples = 0;
  for (std::int64_t t = 0; t <= 500000; t += 12500) {
    for (std::int64_t s = 0; s <= t; s += 12500) {
      const BidPair b(Money::from_ticks(t), Money::from_ticks(s));
      for (std::int64_t r = 0; r <= 600000; r += 7500) {
        ++triples;
        const std::int64_t want = r <= s ? s : (r <= t ? r : 0);
        const auto out = transaction_revenue(Money::from_ticks(r), b);
        if (out.clearing_price.ticks() != want || out.sold != (r <= t)) {
          o.check(false, "mismatch at r=" + std::to_string(r) + " T=" + std::to_string(t) +
                             " S=" + std::to_string(s));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  o.check(triples >= 10000, "grid too small");
  o.check(secs < 1.0, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu triples in %.3f s", triples, secs);
  report(1, "revenue-function", o, buf);
}

// ---------------------------------------------------------------------------

void adaboost_invariants() {
  const auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(2024);
  std::size_t rounds_checked = 0;
  for (int set = 0; set < 60; ++set) {
    const std::size_t n = 20 + rng() % 481;
    const std::size_t dim = 1 + rng() % 8;
    std::uniform_int_distribution<int> level(0, 9);
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : rows[i]) v = level(rng);
      // Mildly learnable: the label leans on column 0.
      y[i] = (rows[i][0] + level(rng) > 9) ? 1 : -1;
    }
    y[0] = 1;
    y[n - 1] = -1;
    const auto x = FeatureMatrix::from_rows(rows);
    const TrainingSet data(x, y);
    AdaBoostTrainer trainer(data);
    double bound = 1.0;
    for (int round = 0; round < 25; ++round) {
      const auto& tr = trainer.step();
      ++rounds_checked;
      const auto w = trainer.weights();
      double sum = 0.0;
      double mis = 0.0;
      const auto& stump = trainer.classifier().stages.back().stump;
      for (std::size_t i = 0; i < n; ++i) {
        sum += w[i];
        if (stump.predict(x.row(i)) != y[i]) mis += w[i];
      }
      const std::string where = "set " + std::to_string(set) + " round " + std::to_string(round);
      o.check(std::abs(sum - 1.0) < 1e-9, where + ": weight sum " + std::to_string(sum));
      if (tr.raw_error == tr.clamped_error) {
        o.check(std::abs(mis - 0.5) < 1e-9, where + ": misclassified weight " + std::to_string(mis));
      }
      bound *= 2.0 * std::sqrt(tr.clamped_error * (1.0 - tr.clamped_error));
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        for (const auto& st : trainer.classifier().stages) score += st.alpha * st.stump.predict(x.row(i));
        if ((score > 0.0 ? 1 : -1) != y[i]) ++wrong;
      }
      const double err = static_cast<double>(wrong) / static_cast<double>(n);
      o.check(err <= bound + 1e-12, where + ": error " + std::to_string(err) + " above bound " +
                                        std::to_string(bound));
    }
  }
  const double secs = seconds_since(t0);
  o.check(secs < 30.0, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "60 datasets, %zu rounds in %.2f s", rounds_checked, secs);
  report(2, "adaboost-invariants", o, buf);
}

// ---------------------------------------------------------------------------

SyntheticConfig seeded_config(std::uint64_t seed) {
  SyntheticConfig c;
  c.n_records = 100000;
  c.seed = seed;
  c.feature_signal_strength = 0.8;
  return c;
}

TrainConfig default_train_config() {
  TrainConfig tc;
  tc.cascade.params = {0.52, 0.95, 0.01};
  return tc;
}

struct SeedRun {
  SyntheticLogs logs;
  DataSplit split;
  TrainedPolicy trained;
};

SeedRun run_seed(std::uint64_t seed) {
  SeedRun s;
  s.logs = generate_synthetic_logs(seeded_config(seed));
  s.split = split_records(s.logs.records, seed);
  s.trained = train_policy(s.split.train, s.split.validation, s.logs.groups, default_train_config());
  return s;
}

void cascade_arithmetic(const SeedRun& held_out) {
  Outcome o;
  CascadeModel m;
  for (int i = 0; i < 10; ++i) m.stage_rates.push_back({0.95, 0.52});
  const double d = m.overall_detection();
  const double f = m.overall_false_positive();
  o.check(std::abs(d - std::pow(0.95, 10)) < 1e-15, "D != 0.95^10");
  o.check(std::abs(f - std::pow(0.52, 10)) < 1e-15, "F != 0.52^10");
  o.check(std::abs(d - 0.5987) < 5e-5, "D does not round to 0.5987");
  o.check(std::abs(f - 0.001446) < 5e-7, "F does not round to 0.001446");
  o.check(std::round(d * 100) == 60 && std::round(f * 10000) == 14, "not ~60% / ~0.14%");

  const auto& models = held_out.trained.models;
  const auto kept = filter_outliers(held_out.split.test, models.buckets.outlier_cap).kept;
  const auto x = models.encoding.encode_all(kept);
  const auto labels = label_records(kept, models.buckets);
  std::vector<int> y;
  for (const auto& l : labels) y.push_back(l.high_value);
  const auto rates = cascade_rates(models.high_value, x, y);
  boost::rational<std::int64_t> dp = 1, fp = 1;
  for (std::size_t i = 0; i < rates.stage_detection.size(); ++i) {
    dp *= rates.stage_detection[i].exact();
    fp *= rates.stage_false_positive[i].exact();
  }
  o.check(dp == rates.overall_detection.exact(), "D != prod d_i on held-out data");
  o.check(fp == rates.overall_false_positive.exact(), "F != prod f_i on held-out data");
  // Overall rates against a direct count of the conjunction.
  std::uint64_t tp = 0, fpos = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    bool all = true;
    for (const auto& st : models.high_value.stages) all = all && strong_predict(st, x.row(i)) > 0;
    (y[i] > 0 ? pos : neg)++;
    if (all) (y[i] > 0 ? tp : fpos)++;
  }
  o.check(rates.overall_detection == Rate{tp, pos}, "overall D differs from direct count");
  o.check(rates.overall_false_positive == Rate{fpos, neg}, "overall F differs from direct count");
  char buf[160];
  std::snprintf(buf, sizeof buf, "D=%.6f F=%.6f; held-out %zu stages D=%.4f F=%.5f exact", d, f,
                models.high_value.stages.size(), rates.overall_detection.value(),
                rates.overall_false_positive.value());
  report(3, "cascade-rate-arithmetic", o, buf);
}

// ---------------------------------------------------------------------------

void auc_oracle() {
  Outcome o;
  std::mt19937_64 rng(77);
  for (int set = 0; set < 100; ++set) {
    const std::size_t n = 2 + rng() % 199;
    std::uniform_int_distribution<int> level(0, 1 + static_cast<int>(rng() % 20));
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = level(rng) * 0.25;
      y[i] = (rng() & 1) ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    std::int64_t twice_wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] < 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (y[j] > 0) continue;
        ++pairs;
        twice_wins += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
      }
    }
    const boost::rational<std::int64_t> exact(twice_wins, 2 * pairs);
    const double want = boost::rational_cast<double>(exact);
    const double got = roc_auc(s, y);
    o.check(std::abs(got - want) <= 1e-12, "set " + std::to_string(set) + ": " +
                                               std::to_string(got) + " vs " + std::to_string(want));
  }
  report(4, "auc-oracle", o, "100 sets within 1e-12 of the pairwise count");
}

// ---------------------------------------------------------------------------

void lift_arithmetic() {
  Outcome o;
  RevenueReport base, updated;
  base[Segment::effected_high_value].revenue = Money::parse("30626");
  base[Segment::effected_low_value].revenue = Money::parse("85753");
  base[Segment::uneffected].revenue = Money::parse("160761");
  updated[Segment::effected_high_value].revenue = Money::parse("40316");
  updated[Segment::effected_low_value].revenue = Money::parse("85647");
  updated[Segment::uneffected].revenue = Money::parse("160761");
  const auto lift = compute_lift(updated, base);
  o.check(std::abs(lift.relative_lift * 100.0 - 3.5) <= 0.05,
          "relative lift " + std::to_string(lift.relative_lift));
  o.check(lift.absolute_lift.ticks() == Money::parse("9584").ticks(), "absolute lift != 9584");
  report(5, "lift-arithmetic", o, lift.to_line());
}

// ---------------------------------------------------------------------------

struct SeedMetrics {
  double hv_auc = 0.0;
  double sep_auc = 0.0;
  double lift = 0.0;
  double oracle_lift = 0.0;
};

SeedMetrics measure(const SeedRun& s, Outcome& no_harm) {
  const auto& models = s.trained.models;
  const auto kept = filter_outliers(s.split.test, models.buckets.outlier_cap).kept;
  const auto x = models.encoding.encode_all(kept);
  const auto labels = label_records(kept, models.buckets);
  std::vector<double> hs(kept.size()), ss(kept.size());
  std::vector<int> hy(kept.size()), sy(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    hs[i] = cascade_score(models.high_value, x.row(i));
    ss[i] = strong_score(models.separation, x.row(i));
    hy[i] = labels[i].high_value;
    sy[i] = labels[i].separation;
  }
  SeedMetrics m;
  m.hv_auc = roc_auc(hs, hy);
  m.sep_auc = roc_auc(ss, sy);

  const auto learned = replay_paired(s.split.test, models);
  m.lift = compute_lift(learned.policy, learned.baseline).relative_lift;
  ReplayOptions opt;
  opt.high_value_cutoff = models.buckets.high_value_cutoff;
  const auto oracle = replay_paired(
      s.split.test,
      [&](const RawRecord& r) { return oracle_decision(r, models.buckets, OracleScope::high_value); },
      opt);
  m.oracle_lift = compute_lift(oracle.policy, oracle.baseline).relative_lift;

  for (const auto* p : {&learned, &oracle}) {
    Money blocked_effected;
    Money total;
    for (std::size_t k = 0; k < p->sampled.size(); ++k) {
      total += p->policy_outcomes[k].clearing_price;
      if (!p->decisions[k].changed) {
        no_harm.check(p->policy_outcomes[k] == p->baseline_outcomes[k],
                      "unchanged record " + s.split.test[p->sampled[k]].record_id + " differs");
      } else if (p->policy_outcomes[k].blocked) {
        blocked_effected += p->baseline_outcomes[k].clearing_price;
      }
    }
    no_harm.check(total == p->policy.total_revenue(), "ledger total != sum of outcomes");
    no_harm.check(p->policy[Segment::uneffected] == p->baseline[Segment::uneffected],
                  "uneffected segment differs");
    no_harm.check(p->policy.total_revenue() + blocked_effected >= p->baseline.total_revenue(),
                  "policy revenue below baseline minus blocked effected revenue");
  }
  return m;
}

SeedRun synthetic_property_suite() {
  const auto t0 = Clock::now();
  Outcome o;
  Outcome no_harm;
  SeedRun first;
  double min_hv = 1, min_sep = 1, min_lift = 1, max_lift = -1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SeedRun s = run_seed(seed);
    const auto m = measure(s, no_harm);
    std::fprintf(stderr,
                 "  seed %2llu: hv_auc=%.4f sep_auc=%.4f lift=%.4f oracle_lift=%.4f stages=%zu\n",
                 static_cast<unsigned long long>(seed), m.hv_auc, m.sep_auc, m.lift, m.oracle_lift,
                 s.trained.models.high_value.stages.size());
    const std::string where = "seed " + std::to_string(seed) + ": ";
    o.check(m.hv_auc >= 0.85, where + "high-value AUC " + std::to_string(m.hv_auc));
    o.check(m.sep_auc >= 0.70, where + "separation AUC " + std::to_string(m.sep_auc));
    o.check(m.lift > 0.0, where + "lift " + std::to_string(m.lift));
    o.check(m.oracle_lift >= m.lift, where + "oracle lift below learned lift");
    min_hv = std::min(min_hv, m.hv_auc);
    min_sep = std::min(min_sep, m.sep_auc);
    min_lift = std::min(min_lift, m.lift);
    max_lift = std::max(max_lift, m.lift);
    if (seed == 1) first = std::move(s);
  }
  const double secs = seconds_since(t0);
  o.check(secs < 600.0, "took " + std::to_string(secs) + " s");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "10 seeds n=100000 s=0.8: min hv_auc=%.3f min sep_auc=%.3f lift %.2f%%..%.2f%% in %.0f s",
                min_hv, min_sep, min_lift * 100, max_lift * 100, secs);
  report(6, "synthetic-properties", o, buf);
  report(7, "no-harm", no_harm, "every replay of criterion 6 (learned and oracle) is consistent");
  return first;
}

// ---------------------------------------------------------------------------

void grid_search(const SeedRun& s) {
  Outcome o;
  const TrainConfig tc = default_train_config();
  const std::vector<Money> hv = {Money::parse("5"), Money::parse("10"), Money::parse("15")};
  const std::vector<Money> gap = {Money::parse("1"), Money::parse("2"), Money::parse("3")};
  const auto sweep = grid_search_cutoffs(s.split, s.logs.groups, tc, hv, gap);

  // Re-run every point from scratch through the public training and replay
  // calls, and pick the best with the same tie rule.
  struct Point {
    Money hv, gap;
    MoneyDelta abs;
    double rel;
  };
  std::vector<Point> points;
  for (Money h : hv) {
    for (Money g : gap) {
      TrainConfig cfg = tc;
      cfg.buckets = tc.buckets.with_high_value_cutoff(h);
      cfg.buckets.gap_cutoff = g;
      const auto trained = train_policy(s.split.train, s.split.validation, s.logs.groups, cfg);
      const auto paired = replay_paired(s.split.test, trained.models);
      const auto lift = compute_lift(paired.policy, paired.baseline);
      points.push_back({h, g, lift.absolute_lift, lift.relative_lift});
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (points[k].abs > points[best].abs ||
        (points[k].abs == points[best].abs && points[k].hv > points[best].hv)) {
      best = k;
    }
  }
  o.check(sweep.cells.size() == points.size(), "cell count differs");
  o.check(sweep.best.has_value(), "sweep picked nothing");
  for (std::size_t k = 0; k < points.size() && k < sweep.cells.size(); ++k) {
    o.check(!sweep.cells[k].skipped, "cell skipped");
    o.check(sweep.cells[k].absolute_lift == points[k].abs && sweep.cells[k].lift == points[k].rel,
            "cell " + std::to_string(k) + " lift differs");
  }
  if (sweep.best) {
    const auto& c = sweep.cells[*sweep.best];
    o.check(c.high_value_cutoff == points[best].hv && c.gap_cutoff == points[best].gap,
            "selected cell differs from the exhaustive maximum");
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "best hv_cutoff=%s gap_cutoff=%s lift=%.4f%% matches re-run",
                points[best].hv.to_string().c_str(), points[best].gap.to_string().c_str(),
                points[best].rel * 100);
  report(8, "grid-search", o, buf);
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  Outcome o;
  auto once = [] {
    SyntheticConfig c = seeded_config(42);
    c.n_records = 30000;
    const auto logs = generate_synthetic_logs(c);
    std::string log_text;
    for (const auto& r : logs.records) log_text += record_to_json(r) + "\n";
    const auto split = split_records(logs.records, 42);
    const auto trained = train_policy(split.train, split.validation, logs.groups, default_train_config());
    const auto model = policy_to_json(trained.models);
    const auto paired = replay_paired(split.test, policy_from_json(model));
    return std::vector<std::string>{log_text, model, paired.policy.to_json(),
                                    paired.baseline.to_csv()};
  };
  const auto a = once();
  const auto b = once();
  o.check(a == b, "library artifacts differ between runs");
  std::string summary = "library generate/train/replay byte-identical";

#ifdef HVR_CLI_PATH
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("hvr_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto cli_run = [&](const std::string& tag) {
    const std::string base = (dir / tag).string();
    const std::string cli = HVR_CLI_PATH;
    const std::string quiet = " >/dev/null 2>&1";
    const int rc1 = std::system((cli + " generate --n 20000 --seed 7 --out " + base + ".jsonl" + quiet).c_str());
    const int rc2 = std::system((cli + " train --logs " + base + ".jsonl --out " + base + ".model.json" + quiet).c_str());
    const int rc3 = std::system((cli + " replay --logs " + base + ".jsonl --policy " + base +
                                 ".model.json --report " + base + ".replay.json --decisions " + base +
                                 ".decisions.csv" + quiet)
                                    .c_str());
    o.check(rc1 == 0 && rc2 == 0 && rc3 == 0, "CLI run failed");
    return std::vector<std::string>{slurp(base + ".jsonl"), slurp(base + ".model.json"),
                                    slurp(base + ".model.json.stages.log"), slurp(base + ".replay.json"),
                                    slurp(base + ".decisions.csv")};
  };
  const auto ca = cli_run("a");
  const auto cb = cli_run("b");
  for (std::size_t k = 0; k < ca.size(); ++k) {
    o.check(!ca[k].empty() && ca[k] == cb[k], "CLI artifact " + std::to_string(k) + " differs");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  summary += "; CLI artifacts byte-identical";
#endif
  report(9, "determinism", o, summary);
}

}  // namespace

int main() {
  try {
    revenue_function();
    adaboost_invariants();
    auc_oracle();
    lift_arithmetic();
    const SeedRun first = synthetic_property_suite();
    cascade_arithmetic(first);
    grid_search(first);
    determinism();
  } catch (const std::exception& e) {
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
