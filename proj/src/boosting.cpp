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

#include "hvreserve/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hvreserve/error.hpp"
#include "hvreserve/parallel.hpp"
#include "json_codec.hpp"

namespace hvr {

double compute_alpha(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::domain, "alpha requires 0 < epsilon < 1");
  }
  return 0.5 * std::log((1.0 - epsilon) / epsilon);
}

// ---------------------------------------------------------------------------

TrainingSet::TrainingSet(const FeatureMatrix& matrix, std::vector<std::size_t> rows,
                         std::vector<int> labels)
    : matrix_(&matrix), rows_(std::move(rows)), labels_(std::move(labels)) {
  if (rows_.size() != labels_.size()) {
    throw Error(ErrorKind::domain, "training set rows and labels differ in length");
  }
  if (rows_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::domain, "training set too large");
  }
  for (auto& y : labels_) {
    y = y > 0 ? 1 : -1;
    if (y > 0) ++positives_;
  }
  for (auto r : rows_) {
    if (r >= matrix.rows()) throw Error(ErrorKind::domain, "training row out of range");
  }
  presort();
}

TrainingSet::TrainingSet(const FeatureMatrix& matrix, std::vector<int> labels)
    : TrainingSet(matrix,
                  [&] {
                    std::vector<std::size_t> rows(matrix.rows());
                    std::iota(rows.begin(), rows.end(), std::size_t{0});
                    return rows;
                  }(),
                  std::move(labels)) {}

void TrainingSet::presort() {
  const std::size_t n = size();
  const std::size_t d = dimension();
  order_.resize(n * d);
  values_.resize(n * d);
  parallel_for(
      d,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::uint32_t>> tmp(n);
        for (std::size_t f = begin; f < end; ++f) {
          for (std::size_t i = 0; i < n; ++i) {
            tmp[i] = {matrix_->at(rows_[i], f), static_cast<std::uint32_t>(i)};
          }
          std::sort(tmp.begin(), tmp.end());
          for (std::size_t i = 0; i < n; ++i) {
            values_[f * n + i] = tmp[i].first;
            order_[f * n + i] = tmp[i].second;
          }
        }
      },
      1);
}

// ---------------------------------------------------------------------------

namespace {

struct Candidate {
  double error = std::numeric_limits<double>::infinity();
  WeakHypothesis stump;
  bool found = false;
};

// Scans midpoints of one presorted feature. `yw` holds y_i * w_i.
Candidate best_on_feature(const TrainingSet& data, std::span<const double> yw,
                          std::size_t feature, double pos_total, double neg_total) {
  Candidate best;
  const auto order = data.sorted(feature);
  const auto values = data.sorted_values(feature);
  const std::size_t n = order.size();
  // running (positive weight below) - (negative weight below)
  double diff_below = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    diff_below += yw[order[k]];
    if (values[k] == values[k + 1]) continue;
    const double threshold = values[k] + (values[k + 1] - values[k]) / 2.0;
    // polarity +1: predicts +1 at/above threshold
    const double err_plus = neg_total + diff_below;
    const double err_minus = pos_total - diff_below;
    if (err_plus < best.error) {
      best = {err_plus, {feature, threshold, 1}, true};
    }
    if (err_minus < best.error) {
      best = {err_minus, {feature, threshold, -1}, true};
    }
  }
  return best;
}

}  // namespace

double weighted_error(const TrainingSet& data, std::span<const double> weights,
                      const WeakHypothesis& stump) {
  double err = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (stump.predict(data.x(i)) != data.y(i)) err += weights[i];
  }
  return err;
}

StumpFit train_stump(const TrainingSet& data, std::span<const double> weights,
                     std::span<const std::size_t> feature_subset) {
  if (weights.size() != data.size()) {
    throw Error(ErrorKind::domain, "weight vector does not match training set");
  }
  std::vector<std::size_t> features(feature_subset.begin(), feature_subset.end());
  if (features.empty()) {
    features.resize(data.dimension());
    std::iota(features.begin(), features.end(), std::size_t{0});
  } else {
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());
    if (features.back() >= data.dimension()) {
      throw Error(ErrorKind::domain, "feature subset index out of range");
    }
  }
  if (features.empty()) throw Error(ErrorKind::domain, "no features to search");

  std::vector<double> yw(data.size());
  double pos_total = 0.0;
  double neg_total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    yw[i] = data.y(i) * weights[i];
    (data.y(i) > 0 ? pos_total : neg_total) += weights[i];
  }

  const auto constant_stump = [&] {
    const int polarity = pos_total >= neg_total ? 1 : -1;
    WeakHypothesis h{features.front(), std::numeric_limits<double>::lowest(), polarity};
    return StumpFit{h, weighted_error(data, weights, h)};
  };
  if (data.positives() == 0 || data.positives() == data.size()) return constant_stump();

  std::vector<Candidate> per_feature(features.size());
  parallel_for(
      features.size(),
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          per_feature[k] = best_on_feature(data, yw, features[k], pos_total, neg_total);
        }
      },
      std::max<std::size_t>(1, 65536 / std::max<std::size_t>(1, data.size())));

  Candidate best;
  for (const auto& c : per_feature) {
    if (c.found && c.error < best.error) best = c;
  }
  // A constant stump can beat every split when one class carries most weight.
  if (!best.found || std::min(pos_total, neg_total) < best.error) return constant_stump();
  return {best.stump, weighted_error(data, weights, best.stump)};
}

// ---------------------------------------------------------------------------

AdaBoostTrainer::AdaBoostTrainer(const TrainingSet& data, std::vector<std::size_t> feature_subset)
    : data_(&data), subset_(std::move(feature_subset)) {
  if (data.size() == 0) throw Error(ErrorKind::training, "AdaBoost needs at least one example");
  if (data.positives() == 0 || data.positives() == data.size()) {
    throw Error(ErrorKind::training,
                "AdaBoost needs both classes; got " + std::to_string(data.positives()) +
                    " positives out of " + std::to_string(data.size()) + " examples");
  }
  weights_.assign(data.size(), 1.0 / static_cast<double>(data.size()));
  margins_.assign(data.size(), 0.0);
  classifier_.schema_id = data.matrix().schema_id();
  classifier_.dimension = data.dimension();
}

const RoundTrace& AdaBoostTrainer::step() {
  const TrainingSet& data = *data_;
  const auto fit = train_stump(data, weights_, subset_);

  RoundTrace t;
  t.raw_error = fit.weighted_error;
  t.clamped_error = std::clamp(fit.weighted_error, kEpsilonFloor, 1.0 - kEpsilonFloor);
  t.alpha = compute_alpha(t.clamped_error);

  double sum = 0.0;
  std::vector<int> h(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    h[i] = fit.stump.predict(data.x(i));
    weights_[i] *= std::exp(-t.alpha * data.y(i) * h[i]);
    sum += weights_[i];
  }
  double check = 0.0;
  double misclassified = 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    weights_[i] /= sum;
    check += weights_[i];
    if (h[i] != data.y(i)) misclassified += weights_[i];
    margins_[i] += t.alpha * h[i];
    const int pred = margins_[i] > 0.0 ? 1 : -1;
    if (pred != data.y(i)) ++wrong;
  }
  t.weight_sum = check;
  t.misclassified_weight = misclassified;
  t.training_error = static_cast<double>(wrong) / static_cast<double>(data.size());
  bound_ *= 2.0 * std::sqrt(t.clamped_error * (1.0 - t.clamped_error));
  t.error_bound = bound_;

  classifier_.stages.push_back({t.alpha, fit.stump});
  classifier_.training_errors.push_back(t.clamped_error);
  trace_.push_back(t);
  return trace_.back();
}

StrongClassifier adaboost_train(const TrainingSet& data, const AdaBoostOptions& options) {
  if (options.rounds == 0) throw Error(ErrorKind::config, "AdaBoost needs at least one round");
  AdaBoostTrainer trainer(data, options.feature_subset);
  for (std::size_t t = 0; t < options.rounds; ++t) trainer.step();
  return trainer.classifier();
}

// ---------------------------------------------------------------------------

double strong_score(const StrongClassifier& c, std::span<const double> x) {
  if (c.dimension != 0 && x.size() != c.dimension) {
    throw Error(ErrorKind::schema_mismatch,
                "feature vector has dimension " + std::to_string(x.size()) +
                    ", classifier expects " + std::to_string(c.dimension));
  }
  double s = 0.0;
  for (const auto& st : c.stages) {
    if (st.stump.feature_index >= x.size()) {
      throw Error(ErrorKind::schema_mismatch, "stump feature index outside feature vector");
    }
    s += st.alpha * st.stump.predict(x);
  }
  return s;
}

int strong_predict(const StrongClassifier& c, std::span<const double> x) {
  return strong_score(c, x) > c.decision_threshold ? 1 : -1;
}

namespace {
void check_schema(const StrongClassifier& c, const FeatureVector& x) {
  if (!c.schema_id.empty() && !x.schema_id.empty() && c.schema_id != x.schema_id) {
    throw Error(ErrorKind::schema_mismatch, "feature vector schema '" + x.schema_id +
                                                "' does not match classifier schema '" +
                                                c.schema_id + "'");
  }
}
}  // namespace

double strong_score(const StrongClassifier& c, const FeatureVector& x) {
  check_schema(c, x);
  return strong_score(c, std::span<const double>(x.values));
}

int strong_predict(const StrongClassifier& c, const FeatureVector& x) {
  check_schema(c, x);
  return strong_predict(c, std::span<const double>(x.values));
}

double training_error(const StrongClassifier& c, const TrainingSet& data) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (strong_predict(c, data.x(i)) != data.y(i)) ++wrong;
  }
  return data.size() == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(data.size());
}

std::vector<double> feature_importance(const StrongClassifier& c, std::size_t dimension) {
  std::vector<double> out(dimension, 0.0);
  for (const auto& st : c.stages) {
    if (st.stump.feature_index < dimension) out[st.stump.feature_index] += std::abs(st.alpha);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace codec {

ojson classifier(const StrongClassifier& c) {
  ojson j;
  j["schema_id"] = c.schema_id;
  j["dimension"] = c.dimension;
  j["decision_threshold"] = real(c.decision_threshold);
  j["stages"] = ojson::array();
  for (const auto& st : c.stages) {
    j["stages"].push_back(
        ojson::array({real(st.alpha), st.stump.feature_index, real(st.stump.threshold),
                      st.stump.polarity}));
  }
  j["training_errors"] = c.training_errors;
  return j;
}

StrongClassifier classifier(const ojson& j) {
  StrongClassifier c;
  try {
    c.schema_id = j.at("schema_id").get<std::string>();
    c.dimension = j.at("dimension").get<std::size_t>();
    c.decision_threshold = real(j.at("decision_threshold"));
    for (const auto& st : j.at("stages")) {
      if (!st.is_array() || st.size() != 4) {
        throw Error(ErrorKind::schema_mismatch, "classifier stage must have 4 entries");
      }
      BoostStage s;
      s.alpha = real(st[0]);
      s.stump.feature_index = st[1].get<std::size_t>();
      s.stump.threshold = real(st[2]);
      s.stump.polarity = st[3].get<int>();
      if (s.stump.polarity != 1 && s.stump.polarity != -1) {
        throw Error(ErrorKind::schema_mismatch, "stump polarity must be +1 or -1");
      }
      if (c.dimension != 0 && s.stump.feature_index >= c.dimension) {
        throw Error(ErrorKind::schema_mismatch, "stump feature index exceeds dimension");
      }
      c.stages.push_back(s);
    }
    c.training_errors = j.at("training_errors").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_mismatch, std::string("malformed classifier: ") + e.what());
  }
  return c;
}

ojson parse(std::string_view text, const char* what) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace codec

std::string classifier_to_json(const StrongClassifier& c) { return codec::classifier(c).dump(); }

StrongClassifier classifier_from_json(std::string_view text) {
  return codec::classifier(codec::parse(text, "classifier"));
}

}  // namespace hvr
