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

#pragma once

#include <boost/rational.hpp>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hvreserve/boosting.hpp"

namespace hvr {

/// Bounds set by hand for cascade training; there are no defaults.
struct CascadeParams {
  double max_stage_fpr = 0.0;   // f: a stage must cut surviving false positives to <= f
  double min_stage_tpr = 0.0;   // d: a stage must keep >= d of surviving positives
  double target_fpr = 0.0;      // F_TGT: training stops once overall fpr <= this

  /// Throws Error(config) unless 0 < f < 1, 0 < d <= 1, 0 < F_TGT < 1.
  void validate() const;

  friend bool operator==(const CascadeParams&, const CascadeParams&) = default;
};

/// Counted rate passed / total. A rate over an empty population is 1
/// (nothing was rejected), which keeps the telescoping product exact.
struct Rate {
  std::uint64_t passed = 0;
  std::uint64_t total = 0;

  double value() const {
    return total == 0 ? 1.0 : static_cast<double>(passed) / static_cast<double>(total);
  }
  boost::rational<std::int64_t> exact() const {
    if (total == 0) return 1;
    return {static_cast<std::int64_t>(passed), static_cast<std::int64_t>(total)};
  }

  friend bool operator==(const Rate&, const Rate&) = default;
};

/// Per-stage rates conditional on surviving all earlier stages.
struct StageRates {
  double detection = 1.0;
  double false_positive = 1.0;

  friend bool operator==(const StageRates&, const StageRates&) = default;
};

struct CascadeModel {
  std::vector<StrongClassifier> stages;
  std::vector<StageRates> stage_rates;  // measured on validation during training
  CascadeParams params;

  /// Products of the recorded stage rates (D = prod d_i, F = prod f_i).
  double overall_detection() const;
  double overall_false_positive() const;

  friend bool operator==(const CascadeModel&, const CascadeModel&) = default;
};

/// Conjunction of the stages, short-circuiting at the first negative. An empty
/// cascade predicts positive. `evaluated`, when given, receives the number of
/// stages scored.
bool cascade_predict(const CascadeModel& model, std::span<const double> x,
                     std::size_t* evaluated = nullptr);

/// Continuous score for ROC analysis: j + logistic(s_j - theta_j) where j is
/// the first failing stage (or the last stage when all pass). Exceeds
/// stages - 0.5 exactly when cascade_predict is true.
double cascade_score(const CascadeModel& model, std::span<const double> x);

/// Largest threshold keeping at least ceil(d_target * n) of `positive_scores`
/// strictly above it. Throws Error(config) for d_target outside (0, 1] and
/// Error(domain) for an empty score list.
double threshold_for_detection(std::vector<double> positive_scores, double d_target);

/// Scores the positives with `stage`, sets its decision threshold via
/// threshold_for_detection and returns the new value.
double adjust_stage_threshold(StrongClassifier& stage, const FeatureMatrix& positives,
                              double d_target);

struct CascadeRates {
  std::vector<Rate> stage_detection;       // conditional on survivors
  std::vector<Rate> stage_false_positive;  // conditional on survivors
  Rate overall_detection;
  Rate overall_false_positive;
};

/// Measures conditional per-stage and overall rates. Throws Error(domain) if
/// the evaluation set lacks either class.
CascadeRates cascade_rates(const CascadeModel& model, const FeatureMatrix& x,
                           std::span<const int> labels);

struct TrainPools {
  const FeatureMatrix* train = nullptr;
  std::vector<std::size_t> positives;  // P: rows of *train
  std::vector<std::size_t> negatives;  // N: rows of *train; also the true-negative pool
  const FeatureMatrix* validation = nullptr;
  std::vector<int> validation_labels;  // V
};

struct StageLog {
  std::size_t stage = 0;
  std::size_t stumps = 0;
  double threshold = 0.0;
  double detection = 0.0;       // d_i
  double false_positive = 0.0;  // f_i
  double overall_detection = 0.0;
  double overall_false_positive = 0.0;
  bool met_stage_target = false;
  std::size_t negatives_trained = 0;

  std::string to_line() const;
};

struct CascadeTrainOptions {
  CascadeParams params;
  /// Minimum stumps per stage before the rate check may end it, stage 1 first;
  /// missing entries continue doubling.
  std::vector<std::size_t> stage_budgets;
  std::size_t max_stages = 25;
  std::size_t max_stumps_per_stage = 400;
  std::function<void(const StageLog&)> on_stage;

  /// Budget for 1-based stage i: explicit entry, else 2^i, capped at the stump cap.
  std::size_t budget_for(std::size_t stage) const;
};

struct CascadeTrainResult {
  CascadeModel model;
  std::vector<StageLog> log;
  bool complete = true;
  std::string diagnostic;  // why training halted early, when !complete
};

CascadeTrainResult train_cascade(const TrainPools& pools, const CascadeTrainOptions& options);

std::string cascade_to_json(const CascadeModel& model);
CascadeModel cascade_from_json(std::string_view text);

}  // namespace hvr
