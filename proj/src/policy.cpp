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

#include "hvreserve/policy.hpp"

#include <cstdio>

#include "hvreserve/auction.hpp"
#include "hvreserve/error.hpp"
#include "json_codec.hpp"

namespace hvr {

std::string_view to_string(DecisionReason reason) {
  switch (reason) {
    case DecisionReason::not_separated: return "not_separated";
    case DecisionReason::not_high_value: return "not_high_value";
    case DecisionReason::bucket_floor_not_above_static: return "bucket_floor_not_above_static";
    case DecisionReason::applied: return "applied";
  }
  return "unknown";
}

void PolicyModels::validate() const {
  buckets.validate();
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::config, "policy lambda must lie in (0, 1]");
  }
  const std::size_t first = buckets.first_high_value_bucket();
  if (bucket_predictor.first_bucket != first ||
      bucket_predictor.first_bucket + bucket_predictor.classifiers.size() !=
          buckets.bucket_count()) {
    throw Error(ErrorKind::config,
                "bucket predictor must cover every bucket at or above the high-value cutoff");
  }
}

std::size_t predict_top_bucket(const BucketPredictor& predictor, std::span<const double> x) {
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t k = 0; k < predictor.classifiers.size(); ++k) {
    const auto& c = predictor.classifiers[k];
    if (!c) continue;
    const double s = strong_score(*c, x);
    if (!best || s > best_score) {
      best = k;
      best_score = s;
    }
  }
  return predictor.first_bucket + best.value_or(0);
}

std::size_t predict_top_bucket(const PolicyModels& models, std::span<const double> x) {
  return predict_top_bucket(models.bucket_predictor, x);
}

ReserveDecision recommend_reserve(const RawRecord& record, std::span<const double> x,
                                  const PolicyModels& models, PolicyCounters* counters) {
  if (x.size() != models.encoding.dimension()) {
    throw Error(ErrorKind::schema_mismatch, "record encoding does not match policy schema");
  }
  ReserveDecision d;
  d.static_reserve = effective_static_reserve(record.reserves);
  d.reserve = d.static_reserve;

  if (counters) ++counters->separation_evaluations;
  d.separation_margin = strong_score(models.separation, x);
  if (!(d.separation_margin > models.separation.decision_threshold)) {
    d.reason = DecisionReason::not_separated;
    return d;
  }
  if (counters) ++counters->cascade_evaluations;
  d.cascade_passed = cascade_predict(models.high_value, x);
  if (!d.cascade_passed) {
    d.reason = DecisionReason::not_high_value;
    return d;
  }
  if (counters) ++counters->bucket_evaluations;
  d.predicted_bucket = predict_top_bucket(models.bucket_predictor, x);
  const Money candidate = bucket_floor(*d.predicted_bucket, models.buckets).scaled(models.lambda);
  if (candidate <= d.static_reserve) {
    d.reason = DecisionReason::bucket_floor_not_above_static;
    return d;
  }
  d.changed = true;
  d.reserve = candidate;
  d.reason = DecisionReason::applied;
  return d;
}

ReserveDecision recommend_reserve(const RawRecord& record, const PolicyModels& models,
                                  PolicyCounters* counters) {
  const auto v = models.encoding.encode(record);
  return recommend_reserve(record, v.values, models, counters);
}

// ---------------------------------------------------------------------------

namespace codec {

ojson bucket_schema(const BucketSchema& s) {
  ojson j;
  j["price_edges"] = ojson::array();
  for (auto e : s.price_edges) j["price_edges"].push_back(money(e));
  j["high_value_cutoff"] = money(s.high_value_cutoff);
  j["gap_cutoff"] = money(s.gap_cutoff);
  j["outlier_cap"] = money(s.outlier_cap);
  return j;
}

BucketSchema bucket_schema(const ojson& j) {
  BucketSchema s;
  try {
    for (const auto& e : j.at("price_edges")) s.price_edges.push_back(money(e));
    s.high_value_cutoff = money(j.at("high_value_cutoff"));
    s.gap_cutoff = money(j.at("gap_cutoff"));
    s.outlier_cap = money(j.at("outlier_cap"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_mismatch, std::string("malformed bucket schema: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace codec

std::string policy_to_json(const PolicyModels& m) {
  codec::ojson j;
  j["format"] = "hvreserve-policy-v1";
  j["lambda"] = m.lambda;
  j["buckets"] = codec::bucket_schema(m.buckets);
  j["encoding"] = codec::ojson::parse(m.encoding.to_json());
  j["separation"] = codec::classifier(m.separation);
  j["high_value"] = codec::cascade(m.high_value);
  codec::ojson bp;
  bp["first_bucket"] = m.bucket_predictor.first_bucket;
  bp["classifiers"] = codec::ojson::array();
  for (const auto& c : m.bucket_predictor.classifiers) {
    bp["classifiers"].push_back(c ? codec::classifier(*c) : codec::ojson(nullptr));
  }
  j["bucket_predictor"] = std::move(bp);
  return j.dump();
}

PolicyModels policy_from_json(std::string_view text) {
  const auto j = codec::parse(text, "policy model");
  PolicyModels m;
  try {
    if (j.value("format", "") != "hvreserve-policy-v1") {
      throw Error(ErrorKind::schema_mismatch, "not an hvreserve policy model");
    }
    m.lambda = j.at("lambda").get<double>();
    m.buckets = codec::bucket_schema(j.at("buckets"));
    m.encoding = EncodingSchema::from_json(j.at("encoding").dump());
    m.separation = codec::classifier(j.at("separation"));
    m.high_value = codec::cascade(j.at("high_value"));
    const auto& bp = j.at("bucket_predictor");
    m.bucket_predictor.first_bucket = bp.at("first_bucket").get<std::size_t>();
    for (const auto& c : bp.at("classifiers")) {
      if (c.is_null()) {
        m.bucket_predictor.classifiers.emplace_back();
      } else {
        m.bucket_predictor.classifiers.emplace_back(codec::classifier(c));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_mismatch, std::string("malformed policy model: ") + e.what());
  }
  const auto check = [&](const StrongClassifier& c, const char* what) {
    if (c.schema_id != m.encoding.id()) {
      throw Error(ErrorKind::schema_mismatch,
                  std::string(what) + " was trained on a different encoding schema");
    }
  };
  check(m.separation, "separation classifier");
  for (const auto& st : m.high_value.stages) check(st, "high-value cascade stage");
  for (const auto& c : m.bucket_predictor.classifiers) {
    if (c) check(*c, "bucket classifier");
  }
  m.validate();
  return m;
}

std::string decision_csv_header() {
  return "record_id,reason,static_reserve,recommended_reserve,predicted_bucket,"
         "separation_margin,cascade_passed";
}

std::string decision_csv_row(std::string_view record_id, const ReserveDecision& d) {
  char margin[32];
  std::snprintf(margin, sizeof margin, "%.17g", d.separation_margin);
  std::string row;
  if (record_id.find_first_of(",\"\r\n") == std::string_view::npos) {
    row += record_id;
  } else {
    row += '"';
    for (char c : record_id) {
      if (c == '"') row += '"';
      row += c;
    }
    row += '"';
  }
  row += ',';
  row += to_string(d.reason);
  row += ',';
  row += d.static_reserve.to_string();
  row += ',';
  row += d.reserve.to_string();
  row += ',';
  row += d.predicted_bucket ? std::to_string(*d.predicted_bucket) : std::string();
  row += ',';
  row += margin;
  row += ',';
  row += d.cascade_passed ? '1' : '0';
  return row;
}

}  // namespace hvr
