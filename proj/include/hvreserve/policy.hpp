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

#include <atomic>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hvreserve/boosting.hpp"
#include "hvreserve/cascade.hpp"
#include "hvreserve/features.hpp"

namespace hvr {

/// One-vs-rest classifiers over the price buckets at or above the high-value
/// cutoff. `classifiers[k]` belongs to bucket `first_bucket + k`; an empty
/// optional marks a bucket with no training examples, which is never chosen.
struct BucketPredictor {
  std::size_t first_bucket = 0;
  std::vector<std::optional<StrongClassifier>> classifiers;

  friend bool operator==(const BucketPredictor&, const BucketPredictor&) = default;
};

struct PolicyModels {
  EncodingSchema encoding;
  BucketSchema buckets;
  StrongClassifier separation;
  CascadeModel high_value;
  BucketPredictor bucket_predictor;
  /// Reserve = lambda * bucket floor; 1 uses the floor itself.
  double lambda = 1.0;

  /// Throws Error(config) if the bucket predictor does not cover every bucket
  /// at or above the cutoff or lambda lies outside (0, 1].
  void validate() const;
};

enum class DecisionReason { not_separated, not_high_value, bucket_floor_not_above_static, applied };

std::string_view to_string(DecisionReason reason);

struct ReserveDecision {
  bool changed = false;
  Money reserve;  // effective reserve to apply
  DecisionReason reason = DecisionReason::not_separated;
  Money static_reserve;
  std::optional<std::size_t> predicted_bucket;
  double separation_margin = 0.0;
  bool cascade_passed = false;
};

/// Counts how far records travel through the decision pipeline.
struct PolicyCounters {
  std::atomic<std::size_t> separation_evaluations{0};
  std::atomic<std::size_t> cascade_evaluations{0};
  std::atomic<std::size_t> bucket_evaluations{0};
};

/// Argmax of the one-vs-rest scores; exact ties go to the lower bucket.
std::size_t predict_top_bucket(const BucketPredictor& predictor, std::span<const double> x);
std::size_t predict_top_bucket(const PolicyModels& models, std::span<const double> x);

/// Separation gate, then high-value cascade, then bucket floor. Records that
/// fail a gate, or whose floor does not beat the static effective reserve,
/// keep the static reserve.
ReserveDecision recommend_reserve(const RawRecord& record, const PolicyModels& models,
                                  PolicyCounters* counters = nullptr);
/// Same, with the record already encoded under models.encoding.
ReserveDecision recommend_reserve(const RawRecord& record, std::span<const double> x,
                                  const PolicyModels& models, PolicyCounters* counters = nullptr);

std::string policy_to_json(const PolicyModels& models);
PolicyModels policy_from_json(std::string_view text);

/// CSV header and row for the decision log.
std::string decision_csv_header();
std::string decision_csv_row(std::string_view record_id, const ReserveDecision& d);

}  // namespace hvr
