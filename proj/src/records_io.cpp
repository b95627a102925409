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

#include <fstream>
#include <set>

#include "hvreserve/error.hpp"
#include "hvreserve/features.hpp"
#include "json.hpp"

namespace hvr {

using ojson = nlohmann::ordered_json;

namespace {

const std::set<std::string, std::less<>> kOptionalKeys = {
    "search_query", "app_info", "prev_clearing_prices", "prev_win_stats"};

const std::set<std::string, std::less<>>& all_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "record_id",   "ad_section",   "site_tld",        "layout",
      "ad_size",     "ssp_host",     "ad_position",     "age",
      "gender",      "device_type",  "geo",             "browser",
      "colo",        "page_views",   "prev_clearing_prices",
      "visit_count", "impressions",  "clicks",          "prev_win_stats",
      "search_query", "app_info",    "buyer_seat",      "winning_demand_seat",
      "date",        "hour",         "dow",             "bids",
      "reserves"};
  return keys;
}

Money money_of(const ojson& v, const std::string& field) {
  if (!v.is_number()) {
    throw Error(ErrorKind::schema_mismatch, "field '" + field + "' must be a number");
  }
  return Money::from_double(v.get<double>());
}

double json_double(Money m) { return static_cast<double>(m.ticks()) / Money::kScale; }

}  // namespace

RawRecord record_from_json(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::io, std::string("malformed JSON record: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::io, "record line is not a JSON object");

  for (const auto& [key, _] : j.items()) {
    if (!all_keys().contains(key)) {
      throw Error(ErrorKind::schema_mismatch, "unknown record field '" + key + "'");
    }
  }
  for (const auto& key : all_keys()) {
    if (!kOptionalKeys.contains(key) && !j.contains(key)) {
      throw Error(ErrorKind::schema_mismatch, "record is missing field '" + key + "'");
    }
  }

  RawRecord r;
  std::string current;
  try {
    const auto str = [&](const char* k, std::string& dst) {
      current = k;
      if (j.contains(k)) dst = j.at(k).get<std::string>();
    };
    const auto int64 = [&](const char* k, std::int64_t& dst) {
      current = k;
      dst = j.at(k).get<std::int64_t>();
    };
    const auto int32 = [&](const char* k, int& dst) {
      current = k;
      dst = j.at(k).get<int>();
    };
    const auto money_list = [&](const char* k, std::vector<Money>& dst) {
      current = k;
      if (!j.contains(k)) return;
      for (const auto& v : j.at(k)) dst.push_back(money_of(v, k));
    };

    str("record_id", r.record_id);
    str("ad_section", r.ad_section);
    str("site_tld", r.site_tld);
    str("layout", r.layout);
    str("ad_size", r.ad_size);
    str("ssp_host", r.ssp_host);
    str("ad_position", r.ad_position);
    int32("age", r.age);
    str("gender", r.gender);
    str("device_type", r.device_type);
    str("geo", r.geo);
    str("browser", r.browser);
    str("colo", r.colo);
    int64("page_views", r.page_views);
    money_list("prev_clearing_prices", r.prev_clearing_prices);
    int64("visit_count", r.visit_count);
    int64("impressions", r.impressions);
    int64("clicks", r.clicks);
    money_list("prev_win_stats", r.prev_win_stats);
    str("search_query", r.search_query);
    str("app_info", r.app_info);
    str("buyer_seat", r.buyer_seat);
    str("winning_demand_seat", r.winning_demand_seat);
    str("date", r.date);
    int32("hour", r.hour);
    int32("dow", r.dow);

    current = "bids";
    const auto& b = j.at("bids");
    r.bids = BidPair(money_of(b.at("top"), "bids.top"), money_of(b.at("second"), "bids.second"));

    current = "reserves";
    const auto& rs = j.at("reserves");
    r.reserves.systemwide = money_of(rs.at("systemwide"), "reserves.systemwide");
    if (rs.contains("uniform") && !rs["uniform"].is_null()) {
      r.reserves.uniform = money_of(rs["uniform"], "reserves.uniform");
    }
    if (rs.contains("deal") && !rs["deal"].is_null()) {
      r.reserves.deal = money_of(rs["deal"], "reserves.deal");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_mismatch,
                "record field '" + current + "' has the wrong type: " + e.what());
  }
  r.validate();
  return r;
}

std::string record_to_json(const RawRecord& r) {
  ojson j;
  j["record_id"] = r.record_id;
  j["ad_section"] = r.ad_section;
  j["site_tld"] = r.site_tld;
  j["layout"] = r.layout;
  j["ad_size"] = r.ad_size;
  j["ssp_host"] = r.ssp_host;
  j["ad_position"] = r.ad_position;
  j["age"] = r.age;
  j["gender"] = r.gender;
  j["device_type"] = r.device_type;
  j["geo"] = r.geo;
  j["browser"] = r.browser;
  j["colo"] = r.colo;
  j["page_views"] = r.page_views;
  j["prev_clearing_prices"] = ojson::array();
  for (auto m : r.prev_clearing_prices) j["prev_clearing_prices"].push_back(json_double(m));
  j["visit_count"] = r.visit_count;
  j["impressions"] = r.impressions;
  j["clicks"] = r.clicks;
  j["prev_win_stats"] = ojson::array();
  for (auto m : r.prev_win_stats) j["prev_win_stats"].push_back(json_double(m));
  j["search_query"] = r.search_query;
  j["app_info"] = r.app_info;
  j["buyer_seat"] = r.buyer_seat;
  j["winning_demand_seat"] = r.winning_demand_seat;
  j["date"] = r.date;
  j["hour"] = r.hour;
  j["dow"] = r.dow;
  j["bids"] = {{"top", json_double(r.bids.top())}, {"second", json_double(r.bids.second())}};
  ojson rs;
  rs["systemwide"] = json_double(r.reserves.systemwide);
  if (r.reserves.uniform) rs["uniform"] = json_double(*r.reserves.uniform);
  if (r.reserves.deal) rs["deal"] = json_double(*r.reserves.deal);
  j["reserves"] = std::move(rs);
  return j.dump();
}

std::vector<RawRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open log file '" + path + "'");
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_records(const std::string& path, std::span<const RawRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write log file '" + path + "'");
  for (const auto& r : records) out << record_to_json(r) << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

BuyerGroupMap read_group_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open buyer group map '" + path + "'");
  std::map<std::string, std::string> m;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [seat, group] : j.items()) m.emplace(seat, group.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, "malformed buyer group map '" + path + "': " + e.what());
  }
  return BuyerGroupMap(std::move(m));
}

std::string group_map_to_json(const BuyerGroupMap& groups) {
  ojson j = ojson::object();
  for (const auto& [seat, group] : groups.entries()) j[seat] = group;
  return j.dump(1);
}

}  // namespace hvr
