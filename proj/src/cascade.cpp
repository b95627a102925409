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

#include "hvreserve/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hvreserve/error.hpp"
#include "hvreserve/parallel.hpp"
#include "json_codec.hpp"

namespace hvr {

void CascadeParams::validate() const {
  if (!(max_stage_fpr > 0.0 && max_stage_fpr < 1.0)) {
    throw Error(ErrorKind::config, "cascade f (max stage fpr) must lie in (0, 1)");
  }
  if (!(min_stage_tpr > 0.0 && min_stage_tpr <= 1.0)) {
    throw Error(ErrorKind::config, "cascade d (min stage tpr) must lie in (0, 1]");
  }
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    throw Error(ErrorKind::config, "cascade F_TGT (target fpr) must lie in (0, 1)");
  }
}

double CascadeModel::overall_detection() const {
  double d = 1.0;
  for (const auto& r : stage_rates) d *= r.detection;
  return d;
}

double CascadeModel::overall_false_positive() const {
  double f = 1.0;
  for (const auto& r : stage_rates) f *= r.false_positive;
  return f;
}

bool cascade_predict(const CascadeModel& model, std::span<const double> x, std::size_t* evaluated) {
  std::size_t n = 0;
  bool passed = true;
  for (const auto& stage : model.stages) {
    ++n;
    if (strong_predict(stage, x) < 0) {
      passed = false;
      break;
    }
  }
  if (evaluated) *evaluated = n;
  return passed;
}

double cascade_score(const CascadeModel& model, std::span<const double> x) {
  const auto logistic = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t j = 0; j < model.stages.size(); ++j) {
    const auto& st = model.stages[j];
    const double margin = strong_score(st, x) - st.decision_threshold;
    if (!(margin > 0.0) || j + 1 == model.stages.size()) {
      // a margin of exactly 0 fails the stage and maps to j + 0.5
      return static_cast<double>(j) + (margin > 0.0 ? std::max(logistic(margin), std::nextafter(0.5, 1.0))
                                                     : std::min(logistic(margin), 0.5));
    }
  }
  return 0.0;
}

double threshold_for_detection(std::vector<double> scores, double d_target) {
  if (!(d_target > 0.0 && d_target <= 1.0)) {
    throw Error(ErrorKind::config, "detection target must lie in (0, 1]");
  }
  if (scores.empty()) throw Error(ErrorKind::domain, "no positive scores to threshold");
  const std::size_t n = scores.size();
  // smallest count k with k / n >= d_target; the tolerance absorbs products
  // like 0.95 * 100 landing a hair above an integer
  auto keep = static_cast<std::size_t>(std::ceil(d_target * static_cast<double>(n) - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, n);
  // k-th largest score must stay strictly above the threshold
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(keep - 1),
                   scores.end(), std::greater<>());
  const double kth = scores[keep - 1];
  return std::nextafter(kth, -std::numeric_limits<double>::infinity());
}

double adjust_stage_threshold(StrongClassifier& stage, const FeatureMatrix& positives,
                              double d_target) {
  std::vector<double> scores(positives.rows());
  for (std::size_t i = 0; i < positives.rows(); ++i) scores[i] = strong_score(stage, positives.row(i));
  stage.decision_threshold = threshold_for_detection(std::move(scores), d_target);
  return stage.decision_threshold;
}

CascadeRates cascade_rates(const CascadeModel& model, const FeatureMatrix& x,
                           std::span<const int> labels) {
  if (labels.size() != x.rows()) {
    throw Error(ErrorKind::domain, "evaluation labels do not match feature rows");
  }
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorKind::domain, "cascade rates need both classes in the evaluation set");
  }
  CascadeRates out;
  out.overall_detection.total = pos.size();
  out.overall_false_positive.total = neg.size();
  const auto survive = [&](const StrongClassifier& st, std::vector<std::size_t>& alive) {
    Rate r{0, alive.size()};
    std::erase_if(alive, [&](std::size_t i) { return strong_predict(st, x.row(i)) < 0; });
    r.passed = alive.size();
    return r;
  };
  for (const auto& st : model.stages) {
    out.stage_detection.push_back(survive(st, pos));
    out.stage_false_positive.push_back(survive(st, neg));
  }
  out.overall_detection.passed = pos.size();
  out.overall_false_positive.passed = neg.size();
  return out;
}

// ---------------------------------------------------------------------------

std::string StageLog::to_line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "stage=%zu stumps=%zu theta=%.6g d_i=%.6f f_i=%.6f D=%.6f F=%.6f met=%d "
                "negatives=%zu",
                stage, stumps, threshold, detection, false_positive, overall_detection,
                overall_false_positive, met_stage_target ? 1 : 0, negatives_trained);
  return buf;
}

std::size_t CascadeTrainOptions::budget_for(std::size_t stage) const {
  std::size_t b;
  if (stage >= 1 && stage <= stage_budgets.size()) {
    b = stage_budgets[stage - 1];
  } else {
    b = stage >= 20 ? max_stumps_per_stage : (std::size_t{1} << stage);
  }
  return std::clamp<std::size_t>(b, 1, max_stumps_per_stage);
}

CascadeTrainResult train_cascade(const TrainPools& pools, const CascadeTrainOptions& options) {
  options.params.validate();
  if (!pools.train || !pools.validation) {
    throw Error(ErrorKind::config, "cascade training needs train and validation matrices");
  }
  if (pools.positives.empty() || pools.negatives.empty()) {
    throw Error(ErrorKind::training, "cascade training needs positive and negative examples");
  }
  if (pools.validation_labels.size() != pools.validation->rows()) {
    throw Error(ErrorKind::domain, "validation labels do not match validation rows");
  }
  const FeatureMatrix& train = *pools.train;
  const FeatureMatrix& valid = *pools.validation;
  const CascadeParams& p = options.params;

  std::vector<std::size_t> valid_pos;
  std::vector<std::size_t> valid_neg;
  for (std::size_t i = 0; i < pools.validation_labels.size(); ++i) {
    (pools.validation_labels[i] > 0 ? valid_pos : valid_neg).push_back(i);
  }
  if (valid_pos.empty() || valid_neg.empty()) {
    throw Error(ErrorKind::training, "validation split needs both classes");
  }
  const std::uint64_t valid_pos_total = valid_pos.size();
  const std::uint64_t valid_neg_total = valid_neg.size();

  CascadeTrainResult result;
  result.model.params = p;
  std::vector<std::size_t> negatives = pools.negatives;
  double big_f = 1.0;  // F_{i-1}, measured on validation
  double big_d = 1.0;

  while (big_f > p.target_fpr) {
    if (result.model.stages.size() >= options.max_stages) {
      result.complete = false;
      result.diagnostic = "stage cap of " + std::to_string(options.max_stages) +
                          " reached with F=" + std::to_string(big_f);
      break;
    }
    if (negatives.empty()) {
      result.complete = false;
      result.diagnostic = "no training negatives pass the cascade; cannot train stage " +
                          std::to_string(result.model.stages.size() + 1);
      break;
    }
    const std::size_t stage_no = result.model.stages.size() + 1;
    const std::size_t budget = options.budget_for(stage_no);

    std::vector<std::size_t> rows = pools.positives;
    rows.insert(rows.end(), negatives.begin(), negatives.end());
    std::vector<int> labels(rows.size(), -1);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(pools.positives.size()), 1);
    TrainingSet data(train, std::move(rows), std::move(labels));
    AdaBoostTrainer trainer(data);

    std::vector<double> pos_scores(valid_pos.size(), 0.0);
    std::vector<double> neg_scores(valid_neg.size(), 0.0);
    double theta = 0.0;
    std::size_t pos_pass = 0;
    std::size_t neg_pass = 0;
    bool met = false;
    while (true) {
      trainer.step();
      const auto& added = trainer.classifier().stages.back();
      for (std::size_t k = 0; k < valid_pos.size(); ++k) {
        pos_scores[k] += added.alpha * added.stump.predict(valid.row(valid_pos[k]));
      }
      for (std::size_t k = 0; k < valid_neg.size(); ++k) {
        neg_scores[k] += added.alpha * added.stump.predict(valid.row(valid_neg[k]));
      }
      theta = threshold_for_detection(pos_scores, p.min_stage_tpr);
      pos_pass = static_cast<std::size_t>(
          std::count_if(pos_scores.begin(), pos_scores.end(), [&](double s) { return s > theta; }));
      neg_pass = static_cast<std::size_t>(
          std::count_if(neg_scores.begin(), neg_scores.end(), [&](double s) { return s > theta; }));
      const double f_i = static_cast<double>(neg_pass) / static_cast<double>(valid_neg.size());
      if (trainer.rounds() >= budget && f_i <= p.max_stage_fpr) {
        met = true;
        break;
      }
      if (trainer.rounds() >= options.max_stumps_per_stage) break;
    }

    StrongClassifier stage = trainer.classifier();
    stage.decision_threshold = theta;
    const Rate d_rate{pos_pass, valid_pos.size()};
    const Rate f_rate{neg_pass, valid_neg.size()};
    result.model.stages.push_back(stage);
    result.model.stage_rates.push_back({d_rate.value(), f_rate.value()});

    // survivors for the next stage
    std::vector<std::size_t> next_pos;
    std::vector<std::size_t> next_neg;
    for (std::size_t k = 0; k < valid_pos.size(); ++k) {
      if (pos_scores[k] > theta) next_pos.push_back(valid_pos[k]);
    }
    for (std::size_t k = 0; k < valid_neg.size(); ++k) {
      if (neg_scores[k] > theta) next_neg.push_back(valid_neg[k]);
    }
    valid_pos = std::move(next_pos);
    valid_neg = std::move(next_neg);
    big_d = static_cast<double>(valid_pos.size()) / static_cast<double>(valid_pos_total);
    big_f = static_cast<double>(valid_neg.size()) / static_cast<double>(valid_neg_total);

    StageLog log;
    log.stage = stage_no;
    log.stumps = trainer.rounds();
    log.threshold = theta;
    log.detection = d_rate.value();
    log.false_positive = f_rate.value();
    log.overall_detection = big_d;
    log.overall_false_positive = big_f;
    log.met_stage_target = met;
    log.negatives_trained = negatives.size();
    result.log.push_back(log);
    if (options.on_stage) options.on_stage(log);

    if (!met) {
      result.complete = false;
      result.diagnostic = "stage " + std::to_string(stage_no) + " hit the stump cap of " +
                          std::to_string(options.max_stumps_per_stage) +
                          " without reaching f=" + std::to_string(p.max_stage_fpr);
      break;
    }

    negatives.clear();
    if (big_f > p.target_fpr) {
      if (valid_pos.empty()) {
        result.complete = false;
        result.diagnostic = "no validation positives survive stage " + std::to_string(stage_no);
        break;
      }
      for (std::size_t r : pools.negatives) {
        if (cascade_predict(result.model, train.row(r))) negatives.push_back(r);
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace codec {

ojson cascade(const CascadeModel& m) {
  ojson j;
  j["params"] = {{"f", m.params.max_stage_fpr},
                 {"d", m.params.min_stage_tpr},
                 {"F_TGT", m.params.target_fpr}};
  j["stages"] = ojson::array();
  for (std::size_t i = 0; i < m.stages.size(); ++i) {
    ojson st = classifier(m.stages[i]);
    if (i < m.stage_rates.size()) {
      st["rates"] = {{"d", m.stage_rates[i].detection}, {"f", m.stage_rates[i].false_positive}};
    }
    j["stages"].push_back(std::move(st));
  }
  j["overall"] = {{"D", m.overall_detection()}, {"F", m.overall_false_positive()}};
  return j;
}

CascadeModel cascade(const ojson& j) {
  CascadeModel m;
  try {
    const auto& p = j.at("params");
    m.params = {p.at("f").get<double>(), p.at("d").get<double>(), p.at("F_TGT").get<double>()};
    for (const auto& st : j.at("stages")) {
      m.stages.push_back(classifier(st));
      const auto& r = st.at("rates");
      m.stage_rates.push_back({r.at("d").get<double>(), r.at("f").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_mismatch, std::string("malformed cascade: ") + e.what());
  }
  return m;
}

}  // namespace codec

std::string cascade_to_json(const CascadeModel& model) { return codec::cascade(model).dump(); }

CascadeModel cascade_from_json(std::string_view text) {
  return codec::cascade(codec::parse(text, "cascade"));
}

}  // namespace hvr
