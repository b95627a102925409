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

#include <cstdio>

#include "hvreserve/error.hpp"
#include "hvreserve/parallel.hpp"
#include "hvreserve/simulator.hpp"

namespace hvr {

GridCell evaluate_grid_point(const DataSplit& split, const BuyerGroupMap& groups,
                             const TrainConfig& config, Money high_value_cutoff,
                             Money gap_cutoff) {
  GridCell cell;
  cell.high_value_cutoff = high_value_cutoff;
  cell.gap_cutoff = gap_cutoff;
  TrainConfig cfg = config;
  cfg.buckets = config.buckets.with_high_value_cutoff(high_value_cutoff);
  cfg.buckets.gap_cutoff = gap_cutoff;
  try {
    const auto trained = train_policy(split.train, split.validation, groups, cfg);
    const auto paired = replay_paired(split.test, trained.models);
    const auto lift = compute_lift(paired.policy, paired.baseline);
    cell.lift = lift.relative_lift;
    cell.absolute_lift = lift.absolute_lift;
    cell.effected = paired.policy[Segment::effected_high_value].auctions +
                    paired.policy[Segment::effected_low_value].auctions;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::training) throw;
    cell.skipped = true;
    cell.diagnostic = e.what();
  }
  return cell;
}

SweepResult grid_search_cutoffs(const DataSplit& split, const BuyerGroupMap& groups,
                                const TrainConfig& config, std::span<const Money> high_value_grid,
                                std::span<const Money> gap_grid) {
  if (high_value_grid.empty() || gap_grid.empty()) {
    throw Error(ErrorKind::config, "cutoff grid must be non-empty");
  }
  SweepResult out;
  for (Money hv : high_value_grid) {
    for (Money gap : gap_grid) {
      GridCell cell;
      cell.high_value_cutoff = hv;
      cell.gap_cutoff = gap;
      out.cells.push_back(std::move(cell));
    }
  }
  parallel_for(
      out.cells.size(),
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          out.cells[k] = evaluate_grid_point(split, groups, config, out.cells[k].high_value_cutoff,
                                             out.cells[k].gap_cutoff);
        }
      },
      1);
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    const auto& c = out.cells[k];
    if (c.skipped) continue;
    if (!out.best) {
      out.best = k;
      continue;
    }
    const auto& b = out.cells[*out.best];
    if (c.absolute_lift > b.absolute_lift ||
        (c.absolute_lift == b.absolute_lift && c.high_value_cutoff > b.high_value_cutoff)) {
      out.best = k;
    }
  }
  return out;
}

std::string SweepResult::to_csv() const {
  std::string out = "hv_cutoff,gap_cutoff,lift,effected_count\n";
  for (const auto& c : cells) {
    if (c.skipped) continue;
    char lift[32];
    std::snprintf(lift, sizeof lift, "%.9f", c.lift);
    out += c.high_value_cutoff.to_string() + "," + c.gap_cutoff.to_string() + "," + lift + "," +
           std::to_string(c.effected) + "\n";
  }
  return out;
}

}  // namespace hvr
