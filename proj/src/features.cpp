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

#include "hvreserve/features.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "hvreserve/error.hpp"
#include "hvreserve/parallel.hpp"
#include "json.hpp"

namespace hvr {

using ojson = nlohmann::ordered_json;

void RawRecord::validate() const {
  if (hour < 0 || hour > 23) {
    throw Error(ErrorKind::domain, "record " + record_id + ": hour out of range [0,23]");
  }
  if (dow < 0 || dow > 6) {
    throw Error(ErrorKind::domain, "record " + record_id + ": dow out of range [0,6]");
  }
  if (age < 0) throw Error(ErrorKind::domain, "record " + record_id + ": negative age");
  reserves.validate();
}

std::size_t age_bucket_index(int age) {
  if (age < 0) throw Error(ErrorKind::domain, "age must be non-negative");
  if (age <= 17) return 0;
  if (age <= 20) return 1;
  if (age <= 24) return 2;
  if (age <= 34) return 3;
  if (age <= 44) return 4;
  if (age <= 54) return 5;
  if (age <= 64) return 6;
  return 7;
}

std::string_view bucketize_age(int age) { return kAgeBuckets[age_bucket_index(age)]; }

namespace {

std::size_t buyer_group_index(std::string_view name) {
  const auto it = std::find(kBuyerGroups.begin(), kBuyerGroups.end(), name);
  return static_cast<std::size_t>(it - kBuyerGroups.begin());
}

constexpr std::size_t kNotag = 9;

}  // namespace

BuyerGroupMap::BuyerGroupMap(std::map<std::string, std::string> seat_to_group) {
  for (auto& [seat, group] : seat_to_group) {
    if (buyer_group_index(group) == kBuyerGroups.size()) {
      throw Error(ErrorKind::config, "seat '" + seat + "' maps to unknown buyer group '" +
                                         group + "'");
    }
    map_.emplace(seat, group);
  }
}

std::string_view BuyerGroupMap::group(std::string_view seat_id) const {
  return kBuyerGroups[group_index(seat_id)];
}

std::size_t BuyerGroupMap::group_index(std::string_view seat_id) const {
  if (seat_id.empty()) return kNotag;
  const auto it = map_.find(seat_id);
  if (it == map_.end()) return kNotag;
  return buyer_group_index(it->second);
}

std::string_view group_buyer_seat(std::string_view seat_id, const BuyerGroupMap& groups) {
  return groups.group(seat_id);
}

// ---------------------------------------------------------------------------

BucketSchema BucketSchema::defaults() {
  BucketSchema s;
  for (double e : {0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 41.0}) {
    s.price_edges.push_back(Money::from_double(e));
  }
  s.high_value_cutoff = Money::from_double(10.0);
  s.gap_cutoff = Money::from_double(2.0);
  s.outlier_cap = Money::from_double(41.0);
  return s;
}

BucketSchema BucketSchema::with_high_value_cutoff(Money cutoff) const {
  BucketSchema s = *this;
  s.high_value_cutoff = cutoff;
  if (std::find(s.price_edges.begin(), s.price_edges.end(), cutoff) == s.price_edges.end()) {
    s.price_edges.insert(std::upper_bound(s.price_edges.begin(), s.price_edges.end(), cutoff),
                         cutoff);
  }
  return s;
}

void BucketSchema::validate() const {
  if (price_edges.size() < 2) {
    throw Error(ErrorKind::config, "bucket schema needs at least two edges");
  }
  if (!price_edges.front().is_zero()) {
    throw Error(ErrorKind::config, "first bucket edge must be 0");
  }
  for (std::size_t i = 1; i < price_edges.size(); ++i) {
    if (!(price_edges[i - 1] < price_edges[i])) {
      throw Error(ErrorKind::config, "bucket edges must be strictly ascending");
    }
  }
  if (std::find(price_edges.begin(), price_edges.end(), high_value_cutoff) == price_edges.end()) {
    throw Error(ErrorKind::config,
                "high-value cutoff " + high_value_cutoff.to_string() + " is not a bucket edge");
  }
  if (outlier_cap.is_zero()) throw Error(ErrorKind::config, "outlier cap must be positive");
}

std::size_t BucketSchema::bucket_of(Money price) const {
  const auto it = std::upper_bound(price_edges.begin(), price_edges.end(), price);
  const auto idx = static_cast<std::size_t>(it - price_edges.begin());
  if (idx == 0) return 0;
  return std::min(idx - 1, bucket_count() - 1);
}

std::size_t BucketSchema::first_high_value_bucket() const {
  const auto it = std::lower_bound(price_edges.begin(), price_edges.end(), high_value_cutoff);
  return static_cast<std::size_t>(it - price_edges.begin());
}

Money bucket_floor(std::size_t bucket, const BucketSchema& schema) {
  if (schema.price_edges.size() < 2 || bucket >= schema.bucket_count()) {
    throw Error(ErrorKind::domain, "invalid bucket id " + std::to_string(bucket));
  }
  return schema.price_edges[bucket];
}

LabelSet label_record(const RawRecord& record, const BucketSchema& schema) {
  LabelSet l;
  l.high_value = record.bids.top() >= schema.high_value_cutoff ? 1 : -1;
  l.separation = record.bids.gap() >= schema.gap_cutoff ? 1 : -1;
  l.top_bucket = schema.bucket_of(record.bids.top());
  return l;
}

std::vector<LabelSet> label_records(std::span<const RawRecord> records,
                                    const BucketSchema& schema) {
  std::vector<LabelSet> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(label_record(r, schema));
  return out;
}

OutlierFilterResult filter_outliers(std::vector<RawRecord> records, Money cap) {
  if (cap.is_zero()) throw Error(ErrorKind::config, "outlier cap must be positive");
  OutlierFilterResult out;
  const auto before = records.size();
  std::erase_if(records, [cap](const RawRecord& r) { return r.bids.top() > cap; });
  out.removed = before - records.size();
  out.kept = std::move(records);
  return out;
}

// ---------------------------------------------------------------------------

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                       std::string schema_id) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  FeatureMatrix m(rows.size(), cols, std::move(schema_id));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorKind::schema_mismatch, "ragged rows in feature matrix");
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

namespace {

using StringField = std::string RawRecord::*;

const std::map<std::string, StringField, std::less<>>& string_fields() {
  static const std::map<std::string, StringField, std::less<>> m = {
      {"ad_section", &RawRecord::ad_section},
      {"site_tld", &RawRecord::site_tld},
      {"layout", &RawRecord::layout},
      {"ad_size", &RawRecord::ad_size},
      {"ssp_host", &RawRecord::ssp_host},
      {"ad_position", &RawRecord::ad_position},
      {"gender", &RawRecord::gender},
      {"device_type", &RawRecord::device_type},
      {"geo", &RawRecord::geo},
      {"browser", &RawRecord::browser},
      {"colo", &RawRecord::colo},
      {"search_query", &RawRecord::search_query},
      {"app_info", &RawRecord::app_info},
      {"winning_demand_seat", &RawRecord::winning_demand_seat},
      {"date", &RawRecord::date},
  };
  return m;
}

const std::string& string_value(const RawRecord& r, const std::string& field) {
  const auto it = string_fields().find(field);
  if (it == string_fields().end()) {
    throw Error(ErrorKind::schema_mismatch, "no string field named '" + field + "'");
  }
  return r.*(it->second);
}

std::size_t list_width(const std::string& name) {
  return name == "prev_clearing_prices" || name == "prev_win_stats" ? 3 : 1;
}

void list_stats(const std::vector<Money>& xs, double* out) {
  if (xs.empty()) {
    out[0] = out[1] = out[2] = 0.0;
    return;
  }
  std::int64_t mx = 0;
  std::int64_t sum = 0;
  for (auto m : xs) {
    mx = std::max(mx, m.ticks());
    sum += m.ticks();
  }
  out[0] = static_cast<double>(mx) / Money::kScale;
  out[1] = static_cast<double>(sum) / Money::kScale / static_cast<double>(xs.size());
  out[2] = static_cast<double>(xs.size());
}

double numeric_value(const RawRecord& r, const std::string& field) {
  if (field == "hour") return r.hour;
  if (field == "page_views") return static_cast<double>(r.page_views);
  if (field == "visit_count") return static_cast<double>(r.visit_count);
  if (field == "impressions") return static_cast<double>(r.impressions);
  if (field == "clicks") return static_cast<double>(r.clicks);
  throw Error(ErrorKind::schema_mismatch, "no numeric field named '" + field + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string_view encoding_name(FieldEncoding e) {
  switch (e) {
    case FieldEncoding::one_hot: return "one_hot";
    case FieldEncoding::ordinal: return "ordinal";
    case FieldEncoding::numeric: return "numeric";
  }
  return "numeric";
}

ojson layout_json(const std::vector<EncodingSchema::Field>& fields, const BuyerGroupMap& groups) {
  ojson j;
  j["fields"] = ojson::array();
  for (const auto& f : fields) {
    ojson jf;
    jf["name"] = f.name;
    jf["encoding"] = encoding_name(f.encoding);
    jf["has_unknown"] = f.has_unknown;
    jf["categories"] = f.categories;
    j["fields"].push_back(std::move(jf));
  }
  ojson g = ojson::object();
  for (const auto& [seat, group] : groups.entries()) g[seat] = group;
  j["buyer_groups"] = std::move(g);
  return j;
}

}  // namespace

const std::vector<std::pair<std::string, FieldEncoding>>& known_fields() {
  static const std::vector<std::pair<std::string, FieldEncoding>> fields = {
      {"age", FieldEncoding::one_hot},
      {"buyer_seat", FieldEncoding::one_hot},
      {"dow", FieldEncoding::one_hot},
      {"gender", FieldEncoding::one_hot},
      {"device_type", FieldEncoding::one_hot},
      {"browser", FieldEncoding::one_hot},
      {"layout", FieldEncoding::one_hot},
      {"ad_size", FieldEncoding::one_hot},
      {"ad_position", FieldEncoding::one_hot},
      {"ad_section", FieldEncoding::ordinal},
      {"site_tld", FieldEncoding::ordinal},
      {"ssp_host", FieldEncoding::ordinal},
      {"geo", FieldEncoding::ordinal},
      {"colo", FieldEncoding::ordinal},
      {"winning_demand_seat", FieldEncoding::ordinal},
      {"search_query", FieldEncoding::ordinal},
      {"app_info", FieldEncoding::ordinal},
      {"date", FieldEncoding::ordinal},
      {"hour", FieldEncoding::numeric},
      {"page_views", FieldEncoding::numeric},
      {"visit_count", FieldEncoding::numeric},
      {"impressions", FieldEncoding::numeric},
      {"clicks", FieldEncoding::numeric},
      {"prev_clearing_prices", FieldEncoding::numeric},
      {"prev_win_stats", FieldEncoding::numeric},
  };
  return fields;
}

namespace {

bool is_fixed_vocabulary(const std::string& name) {
  return name == "age" || name == "buyer_seat" || name == "dow";
}

std::vector<std::string> fixed_vocabulary(const std::string& name) {
  if (name == "age") return {kAgeBuckets.begin(), kAgeBuckets.end()};
  if (name == "buyer_seat") return {kBuyerGroups.begin(), kBuyerGroups.end()};
  return {"0", "1", "2", "3", "4", "5", "6"};
}

}  // namespace

EncodingSchema EncodingSchema::fit(std::span<const RawRecord> records, BuyerGroupMap groups) {
  EncodingSchema s;
  s.groups_ = std::move(groups);
  for (const auto& [name, enc] : known_fields()) {
    Field f;
    f.name = name;
    f.encoding = enc;
    if (enc == FieldEncoding::one_hot && is_fixed_vocabulary(name)) {
      f.categories = fixed_vocabulary(name);
    } else if (enc != FieldEncoding::numeric) {
      std::vector<std::string> seen;
      seen.reserve(records.size());
      for (const auto& r : records) seen.push_back(string_value(r, name));
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      f.categories = std::move(seen);
      f.has_unknown = enc == FieldEncoding::one_hot;
    }
    s.fields_.push_back(std::move(f));
  }
  s.finalize();
  return s;
}

void EncodingSchema::finalize() {
  std::size_t offset = 0;
  for (auto& f : fields_) {
    f.offset = offset;
    switch (f.encoding) {
      case FieldEncoding::one_hot:
        f.width = f.categories.size() + (f.has_unknown ? 1 : 0);
        break;
      case FieldEncoding::ordinal:
        f.width = 1;
        break;
      case FieldEncoding::numeric:
        f.width = list_width(f.name);
        break;
    }
    offset += f.width;
  }
  dimension_ = offset;
  id_ = hex64(fnv1a(layout_json(fields_, groups_).dump()));
}

void EncodingSchema::encode_into(const RawRecord& r, std::span<double> out) const {
  if (out.size() != dimension_) {
    throw Error(ErrorKind::schema_mismatch, "output row has wrong dimension");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& f : fields_) {
    double* col = out.data() + f.offset;
    switch (f.encoding) {
      case FieldEncoding::one_hot: {
        std::size_t idx;
        if (f.name == "age") {
          idx = age_bucket_index(r.age);
        } else if (f.name == "buyer_seat") {
          idx = groups_.group_index(r.buyer_seat);
        } else if (f.name == "dow") {
          if (r.dow < 0 || r.dow > 6) {
            throw Error(ErrorKind::domain, "field 'dow' out of range");
          }
          idx = static_cast<std::size_t>(r.dow);
        } else {
          const auto& v = string_value(r, f.name);
          const auto it = std::lower_bound(f.categories.begin(), f.categories.end(), v);
          if (it != f.categories.end() && *it == v) {
            idx = 1 + static_cast<std::size_t>(it - f.categories.begin());
          } else {
            idx = 0;
          }
        }
        col[idx] = 1.0;
        break;
      }
      case FieldEncoding::ordinal: {
        const auto& v = string_value(r, f.name);
        const auto it = std::lower_bound(f.categories.begin(), f.categories.end(), v);
        col[0] = (it != f.categories.end() && *it == v)
                     ? static_cast<double>(1 + (it - f.categories.begin()))
                     : 0.0;
        break;
      }
      case FieldEncoding::numeric:
        if (f.name == "prev_clearing_prices") {
          list_stats(r.prev_clearing_prices, col);
        } else if (f.name == "prev_win_stats") {
          list_stats(r.prev_win_stats, col);
        } else {
          col[0] = numeric_value(r, f.name);
        }
        break;
    }
  }
}

FeatureVector EncodingSchema::encode(const RawRecord& record) const {
  FeatureVector v;
  v.values.resize(dimension_);
  v.schema_id = id_;
  encode_into(record, v.values);
  return v;
}

FeatureMatrix EncodingSchema::encode_all(std::span<const RawRecord> records) const {
  FeatureMatrix m(records.size(), dimension_, id_);
  parallel_for(records.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) encode_into(records[i], m.row(i));
  });
  return m;
}

std::vector<std::string> EncodingSchema::feature_names() const {
  std::vector<std::string> names;
  names.reserve(dimension_);
  for (const auto& f : fields_) {
    switch (f.encoding) {
      case FieldEncoding::one_hot:
        if (f.has_unknown) names.push_back(f.name + "=<unknown>");
        for (const auto& c : f.categories) names.push_back(f.name + "=" + c);
        break;
      case FieldEncoding::ordinal:
        names.push_back(f.name);
        break;
      case FieldEncoding::numeric:
        if (f.width == 3) {
          for (const char* s : {".max", ".mean", ".count"}) names.push_back(f.name + s);
        } else {
          names.push_back(f.name);
        }
        break;
    }
  }
  return names;
}

std::string EncodingSchema::to_json() const {
  ojson j;
  j["schema_id"] = id_;
  j["dimension"] = dimension_;
  auto layout = layout_json(fields_, groups_);
  j["fields"] = std::move(layout["fields"]);
  j["buyer_groups"] = std::move(layout["buyer_groups"]);
  return j.dump();
}

EncodingSchema EncodingSchema::from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::io, std::string("encoding schema is not valid JSON: ") + e.what());
  }
  EncodingSchema s;
  try {
    std::map<std::string, std::string> groups;
    for (const auto& [seat, group] : j.at("buyer_groups").items()) {
      groups.emplace(seat, group.get<std::string>());
    }
    s.groups_ = BuyerGroupMap(std::move(groups));
    for (const auto& jf : j.at("fields")) {
      Field f;
      f.name = jf.at("name").get<std::string>();
      const auto known = std::find_if(known_fields().begin(), known_fields().end(),
                                      [&](const auto& k) { return k.first == f.name; });
      if (known == known_fields().end()) {
        throw Error(ErrorKind::schema_mismatch, "encoding schema field '" + f.name +
                                                    "' is not a known record field");
      }
      const auto enc = jf.at("encoding").get<std::string>();
      if (enc != encoding_name(known->second)) {
        throw Error(ErrorKind::schema_mismatch,
                    "encoding schema field '" + f.name + "' has encoding '" + enc + "'");
      }
      f.encoding = known->second;
      f.has_unknown = jf.at("has_unknown").get<bool>();
      f.categories = jf.at("categories").get<std::vector<std::string>>();
      s.fields_.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_mismatch, std::string("malformed encoding schema: ") + e.what());
  }
  s.finalize();
  if (j.contains("schema_id") && j["schema_id"].get<std::string>() != s.id_) {
    throw Error(ErrorKind::schema_mismatch, "encoding schema id does not match its contents");
  }
  return s;
}

}  // namespace hvr
