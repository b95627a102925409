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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hvreserve/features.hpp"
#include "hvreserve/money.hpp"
#include "hvreserve/policy.hpp"
#include "hvreserve/training.hpp"

namespace hvr {

// ---------------------------------------------------------------------------
// Synthetic logs

/// Parameters of the synthetic auction generator. The top bid comes from a
/// two-component log-normal mixture split at `high_value_threshold`;
/// membership in the high component is driven by a latent inventory value
/// that the features expose, blended with independent noise according to
/// `feature_signal_strength` (0 = membership independent of every feature).
/// The gap T - S is T times an exponential fraction whose scale depends on a
/// second, competition latent exposed through hour and buyer group.
struct SyntheticConfig {
  std::size_t n_records = 100000;
  std::uint64_t seed = 1;
  double high_value_fraction = 0.05;
  double feature_signal_strength = 0.8;
  Money high_value_threshold = Money::from_ticks(100000);  // 10.00
  double low_log_mean = 0.0;    // log-scale location of the low component
  double low_log_sd = 0.75;
  double high_log_sd = 0.45;    // spread above the threshold
  double gap_mean_fraction = 0.35;
  Money outlier_cap = Money::from_ticks(410000);  // 41.00
  std::size_t sites = 300;
  std::size_t buyer_seats = 60;

  /// Throws Error(config) on out-of-range values.
  void validate() const;
};

struct SyntheticLogs {
  std::vector<RawRecord> records;
  BuyerGroupMap groups;
};

SyntheticLogs generate_synthetic_logs(const SyntheticConfig& config);

// ---------------------------------------------------------------------------
// Revenue accounting

enum class Segment : std::size_t { effected_high_value = 0, effected_low_value = 1, uneffected = 2 };

inline constexpr std::array<Segment, 3> kSegments = {
    Segment::effected_high_value, Segment::effected_low_value, Segment::uneffected};

std::string_view to_string(Segment segment);

struct SegmentLedger {
  Money revenue;
  std::size_t auctions = 0;
  std::size_t sold = 0;
  std::size_t blocked = 0;

  void add(const AuctionOutcome& outcome);
  SegmentLedger& operator+=(const SegmentLedger& other);
  friend bool operator==(const SegmentLedger&, const SegmentLedger&) = default;
};

struct RevenueReport {
  std::array<SegmentLedger, 3> segments;

  SegmentLedger& operator[](Segment s) { return segments[static_cast<std::size_t>(s)]; }
  const SegmentLedger& operator[](Segment s) const { return segments[static_cast<std::size_t>(s)]; }

  Money total_revenue() const;
  std::size_t auctions() const;
  RevenueReport& operator+=(const RevenueReport& other);

  /// segment,revenue,auctions,sold,blocked  (plus a "total" row)
  std::string to_csv() const;
  std::string to_json() const;

  friend bool operator==(const RevenueReport&, const RevenueReport&) = default;
};

struct LiftResult {
  MoneyDelta absolute_lift;
  double relative_lift = 0.0;
  std::array<MoneyDelta, 3> segment_deltas;

  std::string to_line() const;
};

/// Throws Error(domain) when the base total is zero.
LiftResult compute_lift(const RevenueReport& updated, const RevenueReport& base);

/// Per-record reserve decision; must be safe to call concurrently.
using DecisionFn = std::function<ReserveDecision(const RawRecord&)>;

struct ReplayOptions {
  double sample_rate = 1.0;       // keep records with unit_hash(id, sample_seed) < rate
  std::uint64_t sample_seed = 0;
  Money high_value_cutoff = Money::from_ticks(100000);  // segment split for effected auctions
};

/// Replays against static reserves only; every auction is uneffected.
RevenueReport replay(std::span<const RawRecord> records, const ReplayOptions& options = {});

/// Replays with a learned policy. The high-value segment split comes from the
/// policy's bucket schema.
RevenueReport replay(std::span<const RawRecord> records, const PolicyModels& policy,
                     const ReplayOptions& options = {});

struct PairedReplay {
  RevenueReport baseline;  // static reserves, segmented by the policy's decisions
  RevenueReport policy;
  std::vector<ReserveDecision> decisions;  // one per sampled record
  std::vector<std::size_t> sampled;        // indices into the input
  std::vector<AuctionOutcome> baseline_outcomes;
  std::vector<AuctionOutcome> policy_outcomes;
};

/// Runs baseline and policy on the same records with the same segmentation,
/// so segment deltas line up the way a before/after revenue table does.
PairedReplay replay_paired(std::span<const RawRecord> records, const DecisionFn& decide,
                           const ReplayOptions& options);
PairedReplay replay_paired(std::span<const RawRecord> records, const PolicyModels& policy,
                           const ReplayOptions& options = {});

enum class OracleScope { separated_high_value, high_value, all };

/// Decision that knows the true top bid: reserve := T on in-scope auctions
/// where T beats the static effective reserve.
ReserveDecision oracle_decision(const RawRecord& record, const BucketSchema& buckets,
                                OracleScope scope);

// ---------------------------------------------------------------------------
// Cutoff grid search

struct GridCell {
  Money high_value_cutoff;
  Money gap_cutoff;
  bool skipped = false;
  std::string diagnostic;
  double lift = 0.0;
  MoneyDelta absolute_lift;
  std::size_t effected = 0;
};

struct SweepResult {
  std::vector<GridCell> cells;
  std::optional<std::size_t> best;  // index into cells

  /// hv_cutoff,gap_cutoff,lift,effected_count  (skipped cells omitted)
  std::string to_csv() const;
};

/// Relabels with one (cutoff, gap cutoff) pair, retrains on split.train /
/// split.validation and replays on split.test. Single-class labelings come back
/// skipped with a diagnostic.
GridCell evaluate_grid_point(const DataSplit& split, const BuyerGroupMap& groups,
                             const TrainConfig& config, Money high_value_cutoff,
                             Money gap_cutoff);

/// Evaluates every grid point and picks the largest lift; ties go to the
/// higher high-value cutoff, then to the earlier (lower) gap cutoff.
SweepResult grid_search_cutoffs(const DataSplit& split, const BuyerGroupMap& groups,
                                const TrainConfig& config, std::span<const Money> high_value_grid,
                                std::span<const Money> gap_grid);

}  // namespace hvr
