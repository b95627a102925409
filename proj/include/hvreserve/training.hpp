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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hvreserve/cascade.hpp"
#include "hvreserve/features.hpp"
#include "hvreserve/policy.hpp"

namespace hvr {

enum class Split { train, validation, test };

std::string_view to_string(Split split);

/// Uniform value in [0, 1) derived from (seed, record_id). Used for data
/// splits and replay sampling, so membership never depends on file order.
double unit_hash(std::string_view record_id, std::uint64_t seed);

Split assign_split(std::string_view record_id, std::uint64_t seed, double train_fraction,
                   double validation_fraction);

struct DataSplit {
  std::vector<RawRecord> train;
  std::vector<RawRecord> validation;
  std::vector<RawRecord> test;
};

DataSplit split_records(std::span<const RawRecord> records, std::uint64_t seed,
                        double train_fraction = 0.5, double validation_fraction = 0.2);

struct TrainConfig {
  BucketSchema buckets = BucketSchema::defaults();
  std::size_t separation_rounds = 40;
  std::size_t bucket_rounds = 20;
  CascadeTrainOptions cascade;  // cascade.params has no defaults
  double lambda = 1.0;
};

struct TrainReport {
  std::size_t train_records = 0;
  std::size_t validation_records = 0;
  std::size_t outliers_removed = 0;
  std::vector<RoundTrace> separation_trace;
  std::vector<StageLog> cascade_log;
  bool cascade_complete = true;
  std::string cascade_diagnostic;
};

struct TrainedPolicy {
  PolicyModels models;
  TrainReport report;
};

/// Fits the encoding schema, the separation classifier, the high-value
/// cascade and the bucket predictor. Outliers above the cap are dropped from
/// both inputs first. Throws Error(training) when a label family has a single
/// class.
TrainedPolicy train_policy(std::span<const RawRecord> train, std::span<const RawRecord> validation,
                           const BuyerGroupMap& groups, const TrainConfig& config);

}  // namespace hvr
