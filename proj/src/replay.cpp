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

#include "hvreserve/auction.hpp"
#include "hvreserve/error.hpp"
#include "hvreserve/parallel.hpp"
#include "hvreserve/simulator.hpp"
#include "json.hpp"

namespace hvr {

std::string_view to_string(Segment segment) {
  switch (segment) {
    case Segment::effected_high_value: return "effected_high_value";
    case Segment::effected_low_value: return "effected_low_value";
    case Segment::uneffected: return "uneffected";
  }
  return "unknown";
}

void SegmentLedger::add(const AuctionOutcome& o) {
  ++auctions;
  if (o.sold) {
    ++sold;
    revenue += o.clearing_price;
  } else {
    ++blocked;
  }
}

SegmentLedger& SegmentLedger::operator+=(const SegmentLedger& other) {
  revenue += other.revenue;
  auctions += other.auctions;
  sold += other.sold;
  blocked += other.blocked;
  return *this;
}

Money RevenueReport::total_revenue() const {
  Money t;
  for (const auto& s : segments) t += s.revenue;
  return t;
}

std::size_t RevenueReport::auctions() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.auctions;
  return n;
}

RevenueReport& RevenueReport::operator+=(const RevenueReport& other) {
  for (std::size_t i = 0; i < segments.size(); ++i) segments[i] += other.segments[i];
  return *this;
}

std::string RevenueReport::to_csv() const {
  std::string out = "segment,revenue,auctions,sold,blocked\n";
  SegmentLedger total;
  for (auto seg : kSegments) {
    const auto& l = (*this)[seg];
    total += l;
    out += std::string(to_string(seg)) + "," + l.revenue.to_string() + "," +
           std::to_string(l.auctions) + "," + std::to_string(l.sold) + "," +
           std::to_string(l.blocked) + "\n";
  }
  out += "total," + total.revenue.to_string() + "," + std::to_string(total.auctions) + "," +
         std::to_string(total.sold) + "," + std::to_string(total.blocked) + "\n";
  return out;
}

std::string RevenueReport::to_json() const {
  nlohmann::ordered_json j;
  j["segments"] = nlohmann::ordered_json::object();
  for (auto seg : kSegments) {
    const auto& l = (*this)[seg];
    j["segments"][std::string(to_string(seg))] = {{"revenue", l.revenue.to_string()},
                                                  {"auctions", l.auctions},
                                                  {"sold", l.sold},
                                                  {"blocked", l.blocked}};
  }
  j["total_revenue"] = total_revenue().to_string();
  return j.dump(2);
}

LiftResult compute_lift(const RevenueReport& updated, const RevenueReport& base) {
  const Money base_total = base.total_revenue();
  if (base_total.is_zero()) {
    throw Error(ErrorKind::domain, "lift is undefined for a zero baseline revenue");
  }
  LiftResult out;
  out.absolute_lift = updated.total_revenue() - base_total;
  out.relative_lift =
      static_cast<double>(out.absolute_lift.ticks()) / static_cast<double>(base_total.ticks());
  for (std::size_t i = 0; i < 3; ++i) {
    out.segment_deltas[i] = updated.segments[i].revenue - base.segments[i].revenue;
  }
  return out;
}

std::string LiftResult::to_line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "lift absolute=%s relative=%.6f (%.1f%%) high_value_delta=%s "
                "low_value_delta=%s uneffected_delta=%s",
                absolute_lift.to_string().c_str(), relative_lift, relative_lift * 100.0,
                segment_deltas[0].to_string().c_str(), segment_deltas[1].to_string().c_str(),
                segment_deltas[2].to_string().c_str());
  return buf;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> sample_indices(std::span<const RawRecord> records,
                                        const ReplayOptions& options) {
  if (!(options.sample_rate > 0.0 && options.sample_rate <= 1.0)) {
    throw Error(ErrorKind::config, "sample rate must lie in (0, 1]");
  }
  std::vector<std::size_t> idx;
  idx.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (options.sample_rate >= 1.0 ||
        unit_hash(records[i].record_id, options.sample_seed) < options.sample_rate) {
      idx.push_back(i);
    }
  }
  return idx;
}

Segment segment_of(const RawRecord& r, const ReserveDecision& d, Money cutoff) {
  if (!d.changed) return Segment::uneffected;
  return r.bids.top() >= cutoff ? Segment::effected_high_value : Segment::effected_low_value;
}

}  // namespace

RevenueReport replay(std::span<const RawRecord> records, const ReplayOptions& options) {
  const auto idx = sample_indices(records, options);
  std::vector<RevenueReport> shards(shard_count(idx.size()));
  parallel_for(idx.size(), [&](std::size_t shard, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto& r = records[idx[k]];
      shards[shard][Segment::uneffected].add(
          transaction_revenue(effective_static_reserve(r.reserves), r.bids));
    }
  });
  RevenueReport out;
  for (const auto& s : shards) out += s;
  return out;
}

PairedReplay replay_paired(std::span<const RawRecord> records, const DecisionFn& decide,
                           const ReplayOptions& options) {
  PairedReplay out;
  out.sampled = sample_indices(records, options);
  const std::size_t n = out.sampled.size();
  out.decisions.resize(n);
  out.baseline_outcomes.resize(n);
  out.policy_outcomes.resize(n);
  const std::size_t shards = shard_count(n);
  std::vector<RevenueReport> base(shards);
  std::vector<RevenueReport> pol(shards);
  parallel_for(n, [&](std::size_t shard, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto& r = records[out.sampled[k]];
      const ReserveDecision d = decide(r);
      const Segment seg = segment_of(r, d, options.high_value_cutoff);
      out.baseline_outcomes[k] = transaction_revenue(effective_static_reserve(r.reserves), r.bids);
      out.policy_outcomes[k] = transaction_revenue(d.reserve, r.bids);
      base[shard][seg].add(out.baseline_outcomes[k]);
      pol[shard][seg].add(out.policy_outcomes[k]);
      out.decisions[k] = d;
    }
  });
  for (std::size_t s = 0; s < shards; ++s) {
    out.baseline += base[s];
    out.policy += pol[s];
  }
  return out;
}

PairedReplay replay_paired(std::span<const RawRecord> records, const PolicyModels& policy,
                           const ReplayOptions& options) {
  ReplayOptions opts = options;
  opts.high_value_cutoff = policy.buckets.high_value_cutoff;
  return replay_paired(
      records, [&](const RawRecord& r) { return recommend_reserve(r, policy); }, opts);
}

RevenueReport replay(std::span<const RawRecord> records, const PolicyModels& policy,
                     const ReplayOptions& options) {
  return replay_paired(records, policy, options).policy;
}

ReserveDecision oracle_decision(const RawRecord& r, const BucketSchema& buckets, OracleScope scope) {
  ReserveDecision d;
  d.static_reserve = effective_static_reserve(r.reserves);
  d.reserve = d.static_reserve;
  const auto labels = label_record(r, buckets);
  d.separation_margin = labels.separation;
  d.cascade_passed = labels.high_value > 0;
  if (scope == OracleScope::separated_high_value && labels.separation < 0) {
    d.reason = DecisionReason::not_separated;
    return d;
  }
  if (scope != OracleScope::all && labels.high_value < 0) {
    d.reason = DecisionReason::not_high_value;
    return d;
  }
  d.predicted_bucket = labels.top_bucket;
  if (r.bids.top() <= d.static_reserve) {
    d.reason = DecisionReason::bucket_floor_not_above_static;
    return d;
  }
  d.changed = true;
  d.reserve = r.bids.top();
  d.reason = DecisionReason::applied;
  return d;
}

}  // namespace hvr
