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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvreserve/features.hpp"

namespace hvr {

/// Single-feature decision stump: predicts `polarity` when
/// x[feature_index] >= threshold and -polarity otherwise.
struct WeakHypothesis {
  std::size_t feature_index = 0;
  double threshold = 0.0;
  int polarity = 1;

  int predict(std::span<const double> x) const {
    return x[feature_index] >= threshold ? polarity : -polarity;
  }

  friend bool operator==(const WeakHypothesis&, const WeakHypothesis&) = default;
};

struct BoostStage {
  double alpha = 0.0;
  WeakHypothesis stump;

  friend bool operator==(const BoostStage&, const BoostStage&) = default;
};

/// Weighted stump ensemble. predict(x) = +1 iff score(x) > decision_threshold;
/// a score equal to the threshold predicts -1.
struct StrongClassifier {
  std::vector<BoostStage> stages;
  double decision_threshold = 0.0;
  std::vector<double> training_errors;  // clamped epsilon per round
  std::string schema_id;
  std::size_t dimension = 0;  // 0 = unchecked

  friend bool operator==(const StrongClassifier&, const StrongClassifier&) = default;
};

inline constexpr double kEpsilonFloor = 1e-10;

/// 0.5 * ln((1 - eps) / eps). Throws Error(domain) unless 0 < eps < 1.
double compute_alpha(double epsilon);

/// Examples for stump search and boosting: a subset of matrix rows with
/// +1/-1 labels. Columns are presorted once at construction.
class TrainingSet {
 public:
  /// rows: indices into `matrix`; labels[i] belongs to rows[i].
  TrainingSet(const FeatureMatrix& matrix, std::vector<std::size_t> rows, std::vector<int> labels);
  /// Uses every row of `matrix`.
  TrainingSet(const FeatureMatrix& matrix, std::vector<int> labels);

  std::size_t size() const { return rows_.size(); }
  std::size_t dimension() const { return matrix_->cols(); }
  const FeatureMatrix& matrix() const { return *matrix_; }
  std::span<const double> x(std::size_t i) const { return matrix_->row(rows_[i]); }
  int y(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }
  std::size_t positives() const { return positives_; }

  /// Local example indices sorted by (value, index) for one feature.
  std::span<const std::uint32_t> sorted(std::size_t feature) const {
    return {order_.data() + feature * size(), size()};
  }
  std::span<const double> sorted_values(std::size_t feature) const {
    return {values_.data() + feature * size(), size()};
  }

 private:
  void presort();

  const FeatureMatrix* matrix_;
  std::vector<std::size_t> rows_;
  std::vector<int> labels_;
  std::size_t positives_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<double> values_;
};

struct StumpFit {
  WeakHypothesis stump;
  double weighted_error = 0.0;  // sum of weights of misclassified examples
};

/// Exhaustive minimum-weighted-error stump over (feature, midpoint threshold,
/// polarity). Ties go to the lowest feature index, then the lowest threshold,
/// then polarity +1. Single-class data yields a constant stump with zero error.
StumpFit train_stump(const TrainingSet& data, std::span<const double> weights,
                     std::span<const std::size_t> feature_subset = {});

/// Weighted error of a fixed stump, summed directly over the examples.
double weighted_error(const TrainingSet& data, std::span<const double> weights,
                      const WeakHypothesis& stump);

struct RoundTrace {
  double raw_error = 0.0;             // epsilon before clamping
  double clamped_error = 0.0;         // epsilon used for alpha
  double alpha = 0.0;
  double misclassified_weight = 0.0;  // under the updated weights
  double weight_sum = 0.0;            // of the updated weights
  double training_error = 0.0;        // of the ensemble so far, threshold 0
  double error_bound = 0.0;           // prod 2 sqrt(eps (1 - eps))
};

/// Incremental AdaBoost. Each step() runs one round: fit a stump on the
/// current distribution, compute epsilon and alpha, reweight, renormalise.
class AdaBoostTrainer {
 public:
  /// Throws Error(training) if the data has only one class.
  explicit AdaBoostTrainer(const TrainingSet& data, std::vector<std::size_t> feature_subset = {});

  const RoundTrace& step();
  std::size_t rounds() const { return classifier_.stages.size(); }

  const StrongClassifier& classifier() const { return classifier_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const RoundTrace> trace() const { return trace_; }

 private:
  const TrainingSet* data_;
  std::vector<std::size_t> subset_;
  std::vector<double> weights_;
  std::vector<double> margins_;
  StrongClassifier classifier_;
  std::vector<RoundTrace> trace_;
  double bound_ = 1.0;
};

struct AdaBoostOptions {
  std::size_t rounds = 1;
  std::vector<std::size_t> feature_subset;  // empty = all features
};

StrongClassifier adaboost_train(const TrainingSet& data, const AdaBoostOptions& options);

double strong_score(const StrongClassifier& classifier, std::span<const double> x);
int strong_predict(const StrongClassifier& classifier, std::span<const double> x);
/// Same as the span overloads, but also checks the vector's schema id.
double strong_score(const StrongClassifier& classifier, const FeatureVector& x);
int strong_predict(const StrongClassifier& classifier, const FeatureVector& x);

/// Fraction of examples misclassified by sign(score) with the given threshold.
double training_error(const StrongClassifier& classifier, const TrainingSet& data);

/// Total |alpha| per feature.
std::vector<double> feature_importance(const StrongClassifier& classifier, std::size_t dimension);

/// AUC as P(s+ > s-) + 0.5 P(s+ == s-). labels are +1 / -1 (any value > 0 is
/// positive). Throws Error(domain) unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double threshold;
  double false_positive_rate;
  double true_positive_rate;
};

/// ROC points for "score > threshold" as the threshold sweeps downward.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

std::string classifier_to_json(const StrongClassifier& classifier);
StrongClassifier classifier_from_json(std::string_view text);

}  // namespace hvr
