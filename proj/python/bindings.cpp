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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "hvreserve/auction.hpp"
#include "hvreserve/boosting.hpp"
#include "hvreserve/error.hpp"
#include "hvreserve/features.hpp"
#include "hvreserve/policy.hpp"
#include "hvreserve/simulator.hpp"
#include "hvreserve/training.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace hvr;

namespace {

std::vector<RawRecord> parse_lines(const std::vector<std::string>& lines) {
  std::vector<RawRecord> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(record_from_json(l));
  return out;
}

py::dict ledger_dict(const SegmentLedger& l) {
  py::dict d;
  d["revenue"] = l.revenue.to_string();
  d["auctions"] = l.auctions;
  d["sold"] = l.sold;
  d["blocked"] = l.blocked;
  return d;
}

py::dict report_dict(const RevenueReport& r) {
  py::dict d;
  for (auto seg : kSegments) d[py::str(std::string(to_string(seg)))] = ledger_dict(r[seg]);
  d["total_revenue"] = r.total_revenue().to_string();
  return d;
}

RevenueReport report_from(const py::dict& d) {
  RevenueReport r;
  for (auto seg : kSegments) {
    const std::string key(to_string(seg));
    if (d.contains(key)) r[seg].revenue = Money::parse(py::cast<std::string>(d[key.c_str()]));
  }
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Boosted-cascade reserve pricing and auction replay";

  static py::exception<Error> error_type(m, "HvrError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error_type(e.what());
    }
  });

  m.def(
      "transaction_revenue",
      [](const std::string& reserve, const std::string& top, const std::string& second) {
        const auto r = reserve == "inf" ? Money::unbounded() : Money::parse(reserve);
        const auto o = transaction_revenue(r, BidPair(Money::parse(top), Money::parse(second)));
        return py::make_tuple(o.sold, o.clearing_price.to_string());
      },
      py::arg("reserve"), py::arg("top"), py::arg("second"),
      "Hard-reserve second-price outcome as (sold, clearing price).");

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return roc_auc(scores, labels);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "compute_lift",
      [](const py::dict& updated, const py::dict& base) {
        const auto l = compute_lift(report_from(updated), report_from(base));
        py::dict d;
        d["absolute_lift"] = l.absolute_lift.to_string();
        d["relative_lift"] = l.relative_lift;
        d["line"] = l.to_line();
        return d;
      },
      py::arg("updated"), py::arg("base"),
      "Segment revenues keyed by segment name, as decimal strings.");

  m.def(
      "generate_logs",
      [](std::size_t n, std::uint64_t seed, double signal_strength, double high_value_fraction) {
        SyntheticConfig c;
        c.n_records = n;
        c.seed = seed;
        c.feature_signal_strength = signal_strength;
        c.high_value_fraction = high_value_fraction;
        const auto logs = generate_synthetic_logs(c);
        std::vector<std::string> lines;
        lines.reserve(logs.records.size());
        for (const auto& r : logs.records) lines.push_back(record_to_json(r));
        return py::make_tuple(lines, group_map_to_json(logs.groups));
      },
      py::arg("n"), py::arg("seed") = 1, py::arg("signal_strength") = 0.8,
      py::arg("high_value_fraction") = 0.05,
      "Synthetic JSONL lines and the seat-to-group map JSON.");

  m.def(
      "train",
      [](const std::vector<std::string>& lines, const std::string& groups_json,
         std::uint64_t split_seed, double f, double d, double target_fpr, double lambda) {
        const auto recs = parse_lines(lines);
        BuyerGroupMap groups;
        if (!groups_json.empty()) {
          const auto j = nlohmann::json::parse(groups_json);
          groups = BuyerGroupMap(j.get<std::map<std::string, std::string>>());
        }
        const auto split = split_records(recs, split_seed);
        TrainConfig tc;
        tc.cascade.params = {f, d, target_fpr};
        tc.lambda = lambda;
        py::gil_scoped_release release;
        return policy_to_json(train_policy(split.train, split.validation, groups, tc).models);
      },
      py::arg("lines"), py::arg("groups_json") = "", py::arg("split_seed") = 1, py::arg("f") = 0.52,
      py::arg("d") = 0.95, py::arg("target_fpr") = 0.01, py::arg("lam") = 1.0,
      "Trains on the hash train/validation splits and returns the policy model JSON.");

  m.def(
      "replay",
      [](const std::vector<std::string>& lines, const std::string& policy_json) {
        const auto recs = parse_lines(lines);
        const auto models = policy_from_json(policy_json);
        const auto p = replay_paired(recs, models);
        const auto l = compute_lift(p.policy, p.baseline);
        py::dict d;
        d["baseline"] = report_dict(p.baseline);
        d["policy"] = report_dict(p.policy);
        d["relative_lift"] = l.relative_lift;
        d["line"] = l.to_line();
        return d;
      },
      py::arg("lines"), py::arg("policy_json"));

  m.def(
      "recommend",
      [](const std::string& record_json, const std::string& policy_json) {
        const auto d = recommend_reserve(record_from_json(record_json), policy_from_json(policy_json));
        py::dict out;
        out["changed"] = d.changed;
        out["reserve"] = d.reserve.to_string();
        out["reason"] = std::string(to_string(d.reason));
        out["predicted_bucket"] = d.predicted_bucket ? py::cast(*d.predicted_bucket) : py::none();
        return out;
      },
      py::arg("record_json"), py::arg("policy_json"));
}
