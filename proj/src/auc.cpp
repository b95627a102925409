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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hvreserve/boosting.hpp"
#include "hvreserve/error.hpp"

namespace hvr {

namespace {

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::domain, "scores and labels differ in length");
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto idx = order_by_score_desc(scores);
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
  for (int y : labels) (y > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::domain, "AUC is undefined without both classes");
  }

  // Twice the Mann-Whitney U, accumulated exactly in integers: each positive
  // earns 2 per strictly lower negative and 1 per tied negative.
  std::uint64_t doubled_u = 0;
  std::uint64_t neg_seen = 0;  // negatives with strictly higher scores
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    std::uint64_t group_neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] > 0 ? group_pos : group_neg) += 1;
      ++j;
    }
    const std::uint64_t below = neg - neg_seen - group_neg;
    doubled_u += group_pos * (2 * below + group_neg);
    neg_seen += group_neg;
    i = j;
  }
  return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto idx = order_by_score_desc(scores);
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (int y : labels) (y > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::domain, "ROC is undefined without both classes");
  }
  std::vector<RocPoint> out;
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    const double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] > 0 ? tp : fp) += 1;
      ++i;
    }
    // "score > threshold" admits everything seen so far when the threshold
    // sits just below s
    out.push_back({std::nextafter(s, -std::numeric_limits<double>::infinity()),
                   static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return out;
}

}  // namespace hvr
