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

#include "hvreserve/training.hpp"

#include <algorithm>

#include "hvreserve/error.hpp"

namespace hvr {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double unit_hash(std::string_view record_id, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : record_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<double>(splitmix64(h ^ splitmix64(seed)) >> 11) * 0x1.0p-53;
}

Split assign_split(std::string_view record_id, std::uint64_t seed, double train_fraction,
                   double validation_fraction) {
  const double u = unit_hash(record_id, seed);
  if (u < train_fraction) return Split::train;
  if (u < train_fraction + validation_fraction) return Split::validation;
  return Split::test;
}

DataSplit split_records(std::span<const RawRecord> records, std::uint64_t seed,
                        double train_fraction, double validation_fraction) {
  if (!(train_fraction > 0.0 && validation_fraction > 0.0 &&
        train_fraction + validation_fraction < 1.0)) {
    throw Error(ErrorKind::config, "split fractions must be positive and sum below 1");
  }
  DataSplit out;
  for (const auto& r : records) {
    switch (assign_split(r.record_id, seed, train_fraction, validation_fraction)) {
      case Split::train: out.train.push_back(r); break;
      case Split::validation: out.validation.push_back(r); break;
      case Split::test: out.test.push_back(r); break;
    }
  }
  return out;
}

namespace {

void require_both(std::span<const int> labels, const char* what) {
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y > 0; });
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error(ErrorKind::training, std::string(what) + " labels contain a single class (" +
                                         std::to_string(pos) + " positives of " +
                                         std::to_string(labels.size()) + ")");
  }
}

}  // namespace

TrainedPolicy train_policy(std::span<const RawRecord> train_in,
                           std::span<const RawRecord> validation_in, const BuyerGroupMap& groups,
                           const TrainConfig& config) {
  config.buckets.validate();
  config.cascade.params.validate();
  if (config.separation_rounds == 0 || config.bucket_rounds == 0) {
    throw Error(ErrorKind::config, "boosting rounds must be positive");
  }

  TrainedPolicy out;
  auto train_f = filter_outliers({train_in.begin(), train_in.end()}, config.buckets.outlier_cap);
  auto valid_f =
      filter_outliers({validation_in.begin(), validation_in.end()}, config.buckets.outlier_cap);
  out.report.outliers_removed = train_f.removed + valid_f.removed;
  const auto& train = train_f.kept;
  const auto& valid = valid_f.kept;
  out.report.train_records = train.size();
  out.report.validation_records = valid.size();
  if (train.empty() || valid.empty()) {
    throw Error(ErrorKind::training, "train and validation splits must be non-empty");
  }

  PolicyModels& m = out.models;
  m.buckets = config.buckets;
  m.lambda = config.lambda;
  m.encoding = EncodingSchema::fit(train, groups);
  const FeatureMatrix x_train = m.encoding.encode_all(train);
  const FeatureMatrix x_valid = m.encoding.encode_all(valid);
  const auto train_labels = label_records(train, m.buckets);
  const auto valid_labels = label_records(valid, m.buckets);

  std::vector<int> sep(train.size());
  std::vector<int> hv(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    sep[i] = train_labels[i].separation;
    hv[i] = train_labels[i].high_value;
  }
  require_both(sep, "separation");
  require_both(hv, "high-value");
  std::vector<int> hv_valid(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) hv_valid[i] = valid_labels[i].high_value;
  require_both(hv_valid, "validation high-value");

  // separation classifier
  {
    TrainingSet data(x_train, sep);
    AdaBoostTrainer trainer(data);
    for (std::size_t t = 0; t < config.separation_rounds; ++t) trainer.step();
    m.separation = trainer.classifier();
    out.report.separation_trace.assign(trainer.trace().begin(), trainer.trace().end());
  }

  // high-value cascade
  {
    TrainPools pools;
    pools.train = &x_train;
    pools.validation = &x_valid;
    for (std::size_t i = 0; i < train.size(); ++i) {
      (hv[i] > 0 ? pools.positives : pools.negatives).push_back(i);
    }
    pools.validation_labels = hv_valid;
    auto result = train_cascade(pools, config.cascade);
    m.high_value = std::move(result.model);
    out.report.cascade_log = std::move(result.log);
    out.report.cascade_complete = result.complete;
    out.report.cascade_diagnostic = std::move(result.diagnostic);
  }

  // one-vs-rest bucket classifiers over the high-value training rows
  {
    const std::size_t first = m.buckets.first_high_value_bucket();
    m.bucket_predictor.first_bucket = first;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (hv[i] > 0) rows.push_back(i);
    }
    for (std::size_t b = first; b < m.buckets.bucket_count(); ++b) {
      std::vector<int> y(rows.size());
      std::size_t pos = 0;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        y[k] = train_labels[rows[k]].top_bucket == b ? 1 : -1;
        if (y[k] > 0) ++pos;
      }
      if (pos == 0) {
        m.bucket_predictor.classifiers.emplace_back();
      } else if (pos == rows.size()) {
        StrongClassifier only;
        only.schema_id = m.encoding.id();
        only.dimension = m.encoding.dimension();
        m.bucket_predictor.classifiers.emplace_back(std::move(only));
      } else {
        TrainingSet data(x_train, rows, std::move(y));
        m.bucket_predictor.classifiers.emplace_back(
            adaboost_train(data, {.rounds = config.bucket_rounds, .feature_subset = {}}));
      }
    }
  }
  m.validate();
  return out;
}

}  // namespace hvr
