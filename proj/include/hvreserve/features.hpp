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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hvreserve/auction.hpp"
#include "hvreserve/money.hpp"

namespace hvr {

/// One auction log line. Field names match the JSONL keys.
struct RawRecord {
  std::string record_id;

  // publisher
  std::string ad_section;
  std::string site_tld;
  std::string layout;
  std::string ad_size;
  std::string ssp_host;
  std::string ad_position;

  // user
  int age = 0;
  std::string gender;
  std::string device_type;
  std::string geo;
  std::string browser;
  std::string colo;
  std::int64_t page_views = 0;
  std::vector<Money> prev_clearing_prices;
  std::int64_t visit_count = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
  std::vector<Money> prev_win_stats;  // previous winning prices seen for the user
  std::string search_query;
  std::string app_info;

  // buyer
  std::string buyer_seat;
  std::string winning_demand_seat;

  // temporal
  std::string date;
  int hour = 0;  // 0-23
  int dow = 0;   // 0-6

  BidPair bids;
  StaticReserves reserves;

  /// Throws Error(domain) on out-of-range hour / dow / age.
  void validate() const;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

// ---------------------------------------------------------------------------
// Bucketing and grouping

inline constexpr std::array<std::string_view, 8> kAgeBuckets = {
    "0-17", "18-20", "21-24", "25-34", "35-44", "45-54", "55-64", "65+"};

inline constexpr std::array<std::string_view, 10> kBuyerGroups = {
    "AdNetwork", "AgencyTradingDesk", "DSP",     "DSPPowered", "PersonalizedRetargeter",
    "Adx",       "Gemini",            "Sidekick", "YamPlus",    "notag"};

/// Index into kAgeBuckets. Bucket upper bounds are inclusive (17 -> "0-17").
std::size_t age_bucket_index(int age);
std::string_view bucketize_age(int age);

/// seat id -> buyer group name. Values must be one of kBuyerGroups.
class BuyerGroupMap {
 public:
  BuyerGroupMap() = default;
  /// Throws Error(config) if any group is not one of the ten known names.
  explicit BuyerGroupMap(std::map<std::string, std::string> seat_to_group);

  /// Unmapped and empty seats map to "notag".
  std::string_view group(std::string_view seat_id) const;
  std::size_t group_index(std::string_view seat_id) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return map_; }

 private:
  std::map<std::string, std::string, std::less<>> map_;
};

std::string_view group_buyer_seat(std::string_view seat_id, const BuyerGroupMap& groups);

// ---------------------------------------------------------------------------
// Price buckets and labels

/// Half-open price buckets [e_i, e_{i+1}); prices at or above the last edge
/// fall in the last bucket.
struct BucketSchema {
  std::vector<Money> price_edges;
  Money high_value_cutoff;
  Money gap_cutoff;
  Money outlier_cap;

  /// {0, 1, 2, 5, 10, 15, 20, 41}, cutoff 10, gap cutoff 2, cap 41.
  static BucketSchema defaults();

  /// Returns a copy with `cutoff` inserted as an edge when it is not already one.
  BucketSchema with_high_value_cutoff(Money cutoff) const;

  /// Throws Error(config) unless edges ascend strictly, start the first bucket
  /// at or below every price, and the high-value cutoff is an edge.
  void validate() const;

  std::size_t bucket_count() const { return price_edges.size() - 1; }
  std::size_t bucket_of(Money price) const;
  /// Index of the first bucket whose floor is >= high_value_cutoff.
  std::size_t first_high_value_bucket() const;

  friend bool operator==(const BucketSchema&, const BucketSchema&) = default;
};

/// Lower edge of a bucket. Throws Error(domain) on an invalid id.
Money bucket_floor(std::size_t bucket, const BucketSchema& schema);

struct LabelSet {
  int high_value = -1;  // +1 / -1
  int separation = -1;  // +1 / -1
  std::size_t top_bucket = 0;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

LabelSet label_record(const RawRecord& record, const BucketSchema& schema);
std::vector<LabelSet> label_records(std::span<const RawRecord> records,
                                    const BucketSchema& schema);

struct OutlierFilterResult {
  std::vector<RawRecord> kept;
  std::size_t removed = 0;
};

/// Keeps records whose top bid is <= cap. Throws Error(config) if cap is zero.
OutlierFilterResult filter_outliers(std::vector<RawRecord> records, Money cap);

// ---------------------------------------------------------------------------
// Encoding

enum class FieldEncoding { one_hot, ordinal, numeric };

struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Row-major dense matrix of encoded records.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, std::string schema_id)
      : rows_(rows), cols_(cols), data_(rows * cols), schema_id_(std::move(schema_id)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::string& schema_id() const { return schema_id_; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  /// Builds a matrix from explicit rows (tests, small tools).
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                 std::string schema_id = "adhoc");

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::string schema_id_;
};

/// Category index maps fitted on a training corpus. Immutable once fitted.
///
/// Layout, in order of the field list:
///   one_hot   - fixed vocabularies (age bucket, buyer group, dow) get one
///               column per value; fitted vocabularies get a leading
///               "unknown" column followed by one column per seen category.
///   ordinal   - a single column; 0 is the unknown index, seen categories are
///               numbered 1..k in sorted order.
///   numeric   - a single column; list fields expand to {max, mean, count}.
class EncodingSchema {
 public:
  struct Field {
    std::string name;
    FieldEncoding encoding = FieldEncoding::numeric;
    std::vector<std::string> categories;  // fitted or fixed vocabulary
    bool has_unknown = false;             // one-hot only
    std::size_t offset = 0;
    std::size_t width = 0;
  };

  EncodingSchema() = default;

  static EncodingSchema fit(std::span<const RawRecord> records, BuyerGroupMap groups);

  FeatureVector encode(const RawRecord& record) const;
  /// Writes into a caller-provided row of length dimension().
  void encode_into(const RawRecord& record, std::span<double> out) const;
  FeatureMatrix encode_all(std::span<const RawRecord> records) const;

  std::size_t dimension() const { return dimension_; }
  const std::string& id() const { return id_; }
  const std::vector<Field>& fields() const { return fields_; }
  const BuyerGroupMap& groups() const { return groups_; }
  std::vector<std::string> feature_names() const;

  /// JSON text of the schema (category maps, layout, group map).
  std::string to_json() const;
  /// Throws Error(schema_mismatch) naming any field this build does not know.
  static EncodingSchema from_json(std::string_view text);

  friend bool operator==(const EncodingSchema& a, const EncodingSchema& b) {
    return a.id_ == b.id_;
  }

 private:
  void finalize();

  std::vector<Field> fields_;
  BuyerGroupMap groups_;
  std::size_t dimension_ = 0;
  std::string id_;
};

/// Field names recognised by the encoder, with their encoding kind.
const std::vector<std::pair<std::string, FieldEncoding>>& known_fields();

// ---------------------------------------------------------------------------
// JSONL logs

RawRecord record_from_json(std::string_view line);
std::string record_to_json(const RawRecord& record);

std::vector<RawRecord> read_records(const std::string& path);
void write_records(const std::string& path, std::span<const RawRecord> records);

BuyerGroupMap read_group_map(const std::string& path);
std::string group_map_to_json(const BuyerGroupMap& groups);

}  // namespace hvr
