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

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hvreserve/boosting.hpp"
#include "hvreserve/cascade.hpp"
#include "hvreserve/error.hpp"
#include "hvreserve/features.hpp"
#include "hvreserve/parallel.hpp"
#include "hvreserve/policy.hpp"
#include "hvreserve/simulator.hpp"
#include "hvreserve/training.hpp"

namespace {

using hvr::Error;
using hvr::ErrorKind;
using hvr::Money;
using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.3.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Expands `--config file.json` after the subcommand into flags placed ahead of
// the command-line ones, so explicit flags win. Keys starting with '_' are
// manifest metadata and are skipped.
std::vector<std::string> expand_config(std::vector<std::string> args,
                                       const std::vector<std::string>& subcommands) {
  auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
  });
  if (sub == args.end()) return args;
  const std::size_t insert_at = static_cast<std::size_t>(sub - args.begin()) + 1;
  std::vector<std::string> expanded;
  for (std::size_t i = insert_at; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    ojson doc;
    try {
      doc = ojson::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::config, "malformed config " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::config, "config " + path + " is not a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (!key.empty() && key.front() == '_') continue;
      if (value.is_array() || value.is_object() || value.is_null()) {
        throw Error(ErrorKind::config, "config key '" + key + "' must be a scalar");
      }
      expanded.push_back("--" + key);
      expanded.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), expanded.begin(),
              expanded.end());
  return args;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

// Collects artifacts in memory and writes them all at the end, each through a
// temporary file and a rename, so a failed run leaves nothing behind.
class Artifacts {
 public:
  void add(std::string path, std::string content) {
    if (path.empty()) return;
    entries_.emplace_back(std::move(path), std::move(content));
  }

  ojson hashes() const {
    ojson j = ojson::object();
    for (const auto& [path, content] : entries_) j[path] = "sha256:" + sha256_hex(content);
    return j;
  }

  void commit() const {
    std::vector<std::string> temps;
    try {
      for (const auto& [path, content] : entries_) {
        const std::string tmp = path + ".tmp." + std::to_string(::getpid());
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write " + path);
        out << content;
        out.close();
        if (!out) throw Error(ErrorKind::io, "write failed for " + path);
      }
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        std::filesystem::rename(temps[i], entries_[i].first);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& t : temps) std::filesystem::remove(t, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<Money> parse_money_list(const std::string& text, const std::string& what) {
  std::vector<Money> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    out.push_back(Money::parse(item));
  }
  if (out.empty()) throw Error(ErrorKind::config, what + " must list at least one price");
  return out;
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "stage budget '" + item + "' is not a positive integer");
    }
  }
  return out;
}

// Resolved values of every option on `sub`, keyed by long name.
ojson resolved_config(const CLI::App* sub) {
  ojson j = ojson::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "manifest") continue;
    std::string value = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
    j[name] = value;
  }
  return j;
}

std::string manifest_text(const CLI::App* sub, const Artifacts& artifacts) {
  ojson j = resolved_config(sub);
  j["_command"] = sub->get_name();
  j["_version"] = kVersion;
  j["_artifacts"] = artifacts.hashes();
  return j.dump(2) + "\n";
}

std::string default_path(const std::string& given, const std::string& base,
                         const std::string& suffix) {
  return given.empty() ? base + suffix : given;
}

// ---------------------------------------------------------------------------
// shared option groups

struct SplitOptions {
  std::uint64_t seed = 1;
  double train_fraction = 0.5;
  double validation_fraction = 0.2;

  void add(CLI::App* sub) {
    sub->add_option("--split-seed", seed, "Seed of the hash-based train/validation/test split");
    sub->add_option("--train-fraction", train_fraction, "Share of records in the train split");
    sub->add_option("--validation-fraction", validation_fraction,
                    "Share of records in the validation split");
  }

  hvr::DataSplit apply(const std::vector<hvr::RawRecord>& records) const {
    return hvr::split_records(records, seed, train_fraction, validation_fraction);
  }
};

struct TrainOptions {
  std::string price_edges = "0,1,2,5,10,15,20,41";
  std::string high_value_cutoff = "10";
  std::string gap_cutoff = "2";
  std::string outlier_cap = "41";
  double f = 0.52;
  double d = 0.95;
  double target_fpr = 0.01;
  std::string stage_budgets;
  std::size_t max_stages = 25;
  std::size_t max_stumps = 400;
  std::size_t separation_rounds = 40;
  std::size_t bucket_rounds = 20;
  double lambda = 1.0;

  void add(CLI::App* sub) {
    sub->add_option("--price-edges", price_edges, "Comma-separated bucket edges in dollars");
    sub->add_option("--high-value-cutoff", high_value_cutoff, "Top bid at or above this is high-value");
    sub->add_option("--gap-cutoff", gap_cutoff, "Top minus second bid at or above this is separated");
    sub->add_option("--outlier-cap", outlier_cap, "Top bids above this are dropped before training");
    sub->add_option("--f", f, "Maximum false positive rate per cascade stage");
    sub->add_option("--d", d, "Minimum detection rate per cascade stage");
    sub->add_option("--target-fpr", target_fpr, "Overall false positive target of the cascade");
    sub->add_option("--stage-budgets", stage_budgets,
                    "Comma-separated minimum stumps per stage; empty doubles from 2");
    sub->add_option("--max-stages", max_stages, "Cascade stage cap");
    sub->add_option("--max-stumps", max_stumps, "Stump cap per cascade stage");
    sub->add_option("--separation-rounds", separation_rounds, "Boosting rounds of the separation classifier");
    sub->add_option("--bucket-rounds", bucket_rounds, "Boosting rounds of each bucket classifier");
    sub->add_option("--lambda", lambda, "Reserve = lambda * predicted bucket floor, in (0, 1]");
  }

  hvr::TrainConfig resolve() const {
    hvr::TrainConfig c;
    c.buckets.price_edges = parse_money_list(price_edges, "price-edges");
    c.buckets.high_value_cutoff = Money::parse(high_value_cutoff);
    c.buckets.gap_cutoff = Money::parse(gap_cutoff);
    c.buckets.outlier_cap = Money::parse(outlier_cap);
    c.buckets = c.buckets.with_high_value_cutoff(c.buckets.high_value_cutoff);
    c.buckets.validate();
    c.cascade.params = {f, d, target_fpr};
    c.cascade.params.validate();
    c.cascade.stage_budgets = parse_count_list(stage_budgets);
    c.cascade.max_stages = max_stages;
    c.cascade.max_stumps_per_stage = max_stumps;
    if (max_stages == 0 || max_stumps == 0) {
      throw Error(ErrorKind::config, "max-stages and max-stumps must be positive");
    }
    c.separation_rounds = separation_rounds;
    c.bucket_rounds = bucket_rounds;
    c.lambda = lambda;
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorKind::config, "lambda must lie in (0, 1]");
    return c;
  }
};

std::vector<hvr::RawRecord> pick_split(const std::vector<hvr::RawRecord>& records,
                                       const SplitOptions& split, const std::string& which) {
  if (which == "all") return records;
  auto parts = split.apply(records);
  if (which == "train") return std::move(parts.train);
  if (which == "validation") return std::move(parts.validation);
  return std::move(parts.test);
}

hvr::BuyerGroupMap load_groups(const std::string& path) {
  return path.empty() ? hvr::BuyerGroupMap{} : hvr::read_group_map(path);
}

ojson auc_or_null(std::span<const double> scores, std::span<const int> labels) {
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y > 0; });
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) return nullptr;
  return hvr::roc_auc(scores, labels);
}

// ---------------------------------------------------------------------------
// subcommands

struct GenerateCmd {
  hvr::SyntheticConfig cfg;
  std::string threshold = "10";
  std::string cap = "41";
  std::string out;
  std::string groups_out;
  std::string manifest;

  void add(CLI::App* sub) {
    sub->add_option("--n", cfg.n_records, "Number of auction records");
    sub->add_option("--seed", cfg.seed, "Generator seed");
    sub->add_option("--high-value-fraction", cfg.high_value_fraction,
                    "Share of auctions with top bid at or above the threshold");
    sub->add_option("--signal-strength", cfg.feature_signal_strength,
                    "How strongly features determine the top bid, in [0, 1]");
    sub->add_option("--high-value-threshold", threshold, "High-value price threshold in dollars");
    sub->add_option("--low-log-mean", cfg.low_log_mean, "Log-scale location of low-value top bids");
    sub->add_option("--low-log-sd", cfg.low_log_sd, "Log-scale spread of low-value top bids");
    sub->add_option("--high-log-sd", cfg.high_log_sd, "Log-scale spread above the threshold");
    sub->add_option("--gap-mean-fraction", cfg.gap_mean_fraction,
                    "Mean of (top - second) / top before competition scaling");
    sub->add_option("--outlier-cap", cap, "Top bids are capped at this price");
    sub->add_option("--sites", cfg.sites, "Number of distinct sites");
    sub->add_option("--buyer-seats", cfg.buyer_seats, "Number of distinct buyer seats");
    sub->add_option("--out", out, "Output JSONL log")->required();
    sub->add_option("--groups-out", groups_out, "Buyer group map; default <out>.groups.json");
    sub->add_option("--manifest", manifest, "Run manifest; default <out>.manifest.json");
  }

  void run(const CLI::App* sub) {
    cfg.high_value_threshold = Money::parse(threshold);
    cfg.outlier_cap = Money::parse(cap);
    const auto logs = hvr::generate_synthetic_logs(cfg);
    std::string text;
    for (const auto& r : logs.records) {
      text += hvr::record_to_json(r);
      text += '\n';
    }
    Artifacts a;
    a.add(out, std::move(text));
    a.add(default_path(groups_out, out, ".groups.json"), hvr::group_map_to_json(logs.groups) + "\n");
    const std::string m = default_path(manifest, out, ".manifest.json");
    a.add(m, manifest_text(sub, a));
    a.commit();
    std::cerr << "generated " << logs.records.size() << " records -> " << out << "\n";
  }
};

struct TrainCmd {
  std::string logs;
  std::string group_map;
  SplitOptions split;
  TrainOptions train;
  std::string out;
  std::string stage_log;
  std::string manifest;

  void add(CLI::App* sub) {
    sub->add_option("--logs", logs, "Input JSONL log")->required();
    sub->add_option("--group-map", group_map, "Buyer group map JSON; empty maps every seat to notag");
    split.add(sub);
    train.add(sub);
    sub->add_option("--out", out, "Output policy model JSON")->required();
    sub->add_option("--stage-log", stage_log, "Per-stage cascade log; default <out>.stages.log");
    sub->add_option("--manifest", manifest, "Run manifest; default <out>.manifest.json");
  }

  void run(const CLI::App* sub) {
    auto config = train.resolve();
    config.cascade.on_stage = [](const hvr::StageLog& s) { std::cerr << s.to_line() << "\n"; };
    const auto records = hvr::read_records(logs);
    const auto groups = load_groups(group_map);
    const auto parts = split.apply(records);
    const auto trained = hvr::train_policy(parts.train, parts.validation, groups, config);
    const auto& rep = trained.report;
    if (!rep.cascade_complete) {
      std::cerr << "warning: cascade incomplete: " << rep.cascade_diagnostic << "\n";
    }

    std::string log_text;
    for (const auto& s : rep.cascade_log) log_text += s.to_line() + "\n";
    if (!rep.cascade_complete) log_text += "incomplete: " + rep.cascade_diagnostic + "\n";

    Artifacts a;
    a.add(out, hvr::policy_to_json(trained.models) + "\n");
    a.add(default_path(stage_log, out, ".stages.log"), std::move(log_text));
    a.add(default_path(manifest, out, ".manifest.json"), manifest_text(sub, a));
    a.commit();
    std::cerr << "trained on " << rep.train_records << " records (" << rep.validation_records
              << " validation, " << rep.outliers_removed << " outliers removed), "
              << trained.models.high_value.stages.size() << " cascade stages -> " << out << "\n";
  }
};

struct EvaluateCmd {
  std::string logs;
  std::string model;
  std::string which = "test";
  SplitOptions split;
  std::string out;
  std::string decisions;
  std::string manifest;

  void add(CLI::App* sub) {
    sub->add_option("--logs", logs, "Input JSONL log")->required();
    sub->add_option("--model", model, "Policy model JSON")->required();
    sub->add_option("--split", which, "Records to evaluate")
        ->check(CLI::IsMember({"train", "validation", "test", "all"}));
    split.add(sub);
    sub->add_option("--out", out, "Metrics JSON; empty prints to stdout");
    sub->add_option("--decisions", decisions, "Decision log CSV; empty skips it");
    sub->add_option("--manifest", manifest, "Run manifest; default <out>.manifest.json when --out is set");
  }

  void run(const CLI::App* sub) {
    const auto models = hvr::policy_from_json(read_file(model));
    auto filtered = hvr::filter_outliers(pick_split(hvr::read_records(logs), split, which),
                                         models.buckets.outlier_cap);
    const auto& recs = filtered.kept;
    if (recs.empty()) throw Error(ErrorKind::domain, "no records to evaluate");
    const auto x = models.encoding.encode_all(recs);
    const auto labels = hvr::label_records(recs, models.buckets);

    std::vector<int> sep(recs.size());
    std::vector<int> hv(recs.size());
    std::vector<double> sep_scores(recs.size());
    std::vector<double> hv_scores(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      sep[i] = labels[i].separation;
      hv[i] = labels[i].high_value;
      sep_scores[i] = hvr::strong_score(models.separation, x.row(i));
      hv_scores[i] = hvr::cascade_score(models.high_value, x.row(i));
    }

    ojson j;
    j["records"] = recs.size();
    j["outliers_removed"] = filtered.removed;
    j["split"] = which;

    ojson s;
    s["auc"] = auc_or_null(sep_scores, sep);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (hvr::strong_predict(models.separation, x.row(i)) != sep[i]) ++wrong;
    }
    s["error"] = static_cast<double>(wrong) / static_cast<double>(recs.size());
    double bound = 1.0;
    for (double e : models.separation.training_errors) bound *= 2.0 * std::sqrt(e * (1.0 - e));
    s["training_error_bound"] = bound;
    s["rounds"] = models.separation.stages.size();
    j["separation"] = std::move(s);

    ojson h;
    h["auc"] = auc_or_null(hv_scores, hv);
    h["stages"] = models.high_value.stages.size();
    if (!h["auc"].is_null()) {
      const auto rates = hvr::cascade_rates(models.high_value, x, hv);
      ojson st = ojson::array();
      for (std::size_t k = 0; k < rates.stage_detection.size(); ++k) {
        st.push_back({{"stage", k + 1},
                      {"d", rates.stage_detection[k].value()},
                      {"f", rates.stage_false_positive[k].value()}});
      }
      h["stage_rates"] = std::move(st);
      h["D"] = rates.overall_detection.value();
      h["F"] = rates.overall_false_positive.value();
    }
    j["high_value"] = std::move(h);

    hvr::PolicyCounters counters;
    std::size_t changed = 0;
    std::size_t correct_bucket = 0;
    std::string csv = hvr::decision_csv_header() + "\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto d = hvr::recommend_reserve(recs[i], x.row(i), models, &counters);
      if (d.changed) {
        ++changed;
        if (d.predicted_bucket == labels[i].top_bucket) ++correct_bucket;
      }
      if (!decisions.empty()) csv += hvr::decision_csv_row(recs[i].record_id, d) + "\n";
    }
    j["policy"] = {{"changed", changed},
                   {"changed_with_true_bucket", correct_bucket},
                   {"separation_evaluations", counters.separation_evaluations.load()},
                   {"cascade_evaluations", counters.cascade_evaluations.load()},
                   {"bucket_evaluations", counters.bucket_evaluations.load()}};

    const std::string text = j.dump(2) + "\n";
    Artifacts a;
    if (out.empty()) {
      std::cout << text;
    } else {
      a.add(out, text);
    }
    a.add(decisions, std::move(csv));
    if (!out.empty() || !manifest.empty()) {
      a.add(default_path(manifest, out, ".manifest.json"), manifest_text(sub, a));
    }
    a.commit();
  }
};

struct ReplayCmd {
  std::string logs;
  std::string policy = "none";
  std::string which = "test";
  SplitOptions split;
  double sample_rate = 1.0;
  std::uint64_t sample_seed = 0;
  std::string high_value_cutoff = "10";
  std::string report;
  std::string decisions;
  std::string manifest;

  void add(CLI::App* sub) {
    sub->add_option("--logs", logs, "Input JSONL log")->required();
    sub->add_option("--policy", policy, "Policy model JSON, or none for static reserves only");
    sub->add_option("--split", which, "Records to replay")
        ->check(CLI::IsMember({"train", "validation", "test", "all"}));
    split.add(sub);
    sub->add_option("--sample-rate", sample_rate, "Share of records replayed, chosen by record id hash");
    sub->add_option("--sample-seed", sample_seed, "Seed of the sampling hash");
    sub->add_option("--high-value-cutoff", high_value_cutoff,
                    "Segment cutoff when --policy is none; otherwise taken from the model");
    sub->add_option("--report", report, "Revenue report JSON; empty skips it");
    sub->add_option("--decisions", decisions, "Decision log CSV; empty skips it");
    sub->add_option("--manifest", manifest, "Run manifest; default <report>.manifest.json when --report is set");
  }

  void run(const CLI::App* sub) {
    if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
      throw Error(ErrorKind::config, "sample-rate must lie in (0, 1]");
    }
    const auto recs = pick_split(hvr::read_records(logs), split, which);
    hvr::ReplayOptions opt;
    opt.sample_rate = sample_rate;
    opt.sample_seed = sample_seed;
    hvr::PairedReplay p;
    if (policy == "none") {
      opt.high_value_cutoff = Money::parse(high_value_cutoff);
      p = hvr::replay_paired(
          recs,
          [](const hvr::RawRecord& r) {
            hvr::ReserveDecision d;
            d.static_reserve = hvr::effective_static_reserve(r.reserves);
            d.reserve = d.static_reserve;
            return d;
          },
          opt);
    } else {
      const auto models = hvr::policy_from_json(read_file(policy));
      opt.high_value_cutoff = models.buckets.high_value_cutoff;
      p = hvr::replay_paired(recs, models, opt);
    }
    const auto lift = hvr::compute_lift(p.policy, p.baseline);
    std::cout << lift.to_line() << "\n";

    Artifacts a;
    if (!report.empty()) {
      ojson j;
      j["records"] = p.sampled.size();
      j["baseline"] = ojson::parse(p.baseline.to_json());
      j["policy"] = ojson::parse(p.policy.to_json());
      j["lift"] = lift.to_line();
      j["relative_lift"] = lift.relative_lift;
      a.add(report, j.dump(2) + "\n");
    }
    if (!decisions.empty()) {
      std::string csv = hvr::decision_csv_header() + "\n";
      for (std::size_t k = 0; k < p.sampled.size(); ++k) {
        csv += hvr::decision_csv_row(recs[p.sampled[k]].record_id, p.decisions[k]) + "\n";
      }
      a.add(decisions, std::move(csv));
    }
    if (!report.empty() || !manifest.empty()) {
      a.add(default_path(manifest, report, ".manifest.json"), manifest_text(sub, a));
    }
    a.commit();
  }
};

struct SweepCmd {
  std::string logs;
  std::string group_map;
  SplitOptions split;
  TrainOptions train;
  std::string hv_grid = "5,10,15";
  std::string gap_grid = "1,2,3";
  std::string out;
  std::string manifest;

  void add(CLI::App* sub) {
    sub->add_option("--logs", logs, "Input JSONL log")->required();
    sub->add_option("--group-map", group_map, "Buyer group map JSON; empty maps every seat to notag");
    split.add(sub);
    train.add(sub);
    sub->add_option("--hv-grid", hv_grid, "Comma-separated high-value cutoffs");
    sub->add_option("--gap-grid", gap_grid, "Comma-separated gap cutoffs");
    sub->add_option("--out", out, "Grid CSV")->required();
    sub->add_option("--manifest", manifest, "Run manifest; default <out>.manifest.json");
  }

  void run(const CLI::App* sub) {
    const auto config = train.resolve();
    const auto hv = parse_money_list(hv_grid, "hv-grid");
    const auto gap = parse_money_list(gap_grid, "gap-grid");
    const auto records = hvr::read_records(logs);
    const auto parts = split.apply(records);
    const auto result = hvr::grid_search_cutoffs(parts, load_groups(group_map), config, hv, gap);
    for (const auto& c : result.cells) {
      if (c.skipped) {
        std::cerr << "skipped hv_cutoff=" << c.high_value_cutoff.to_string()
                  << " gap_cutoff=" << c.gap_cutoff.to_string() << ": " << c.diagnostic << "\n";
      }
    }
    if (result.best) {
      const auto& b = result.cells[*result.best];
      std::cout << "best hv_cutoff=" << b.high_value_cutoff.to_string()
                << " gap_cutoff=" << b.gap_cutoff.to_string() << " lift=" << b.lift << "\n";
    } else {
      std::cout << "best none\n";
    }
    Artifacts a;
    a.add(out, result.to_csv());
    a.add(default_path(manifest, out, ".manifest.json"), manifest_text(sub, a));
    a.commit();
  }
};

void fail(std::string_view kind, std::string_view message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c == '\n' ? ' ' : c;
  }
  std::cerr << "error: kind=" << kind << " message=\"" << escaped << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-value auction reserve pricing: generate, train, evaluate, replay, sweep"};
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads; 0 uses every hardware thread");

  GenerateCmd gen;
  TrainCmd train;
  EvaluateCmd eval;
  ReplayCmd rep;
  SweepCmd sweep;
  struct Entry {
    CLI::App* app;
    std::function<void(const CLI::App*)> run;
  };
  std::vector<Entry> entries;
  std::deque<std::string> config_paths;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_paths.emplace_back(),
                    "Flat JSON config; keys are long flag names, flags override it");
    cmd.add(sub);
    entries.push_back({sub, [&cmd](const CLI::App* s) { cmd.run(s); }});
  };
  add("generate", "Write seeded synthetic auction logs", gen);
  add("train", "Fit encoding, separation classifier, cascade and bucket predictors", train);
  add("evaluate", "AUC, cascade rates and decision log on a split", eval);
  add("replay", "Replay a split with and without the policy and report lift", rep);
  add("sweep", "Grid search over high-value and gap cutoffs", sweep);

  try {
    std::vector<std::string> names;
    for (const auto& e : entries) names.push_back(e.app->get_name());
    auto args = expand_config(std::vector<std::string>(argv + 1, argv + argc), names);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const Error& e) {
    fail(hvr::to_string(e.kind()), e.what());
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  try {
    hvr::set_thread_count(threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : threads);
    for (const auto& e : entries) {
      if (e.app->parsed()) e.run(e.app);
    }
  } catch (const Error& e) {
    fail(hvr::to_string(e.kind()), e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    fail("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return 1;
  }
  return 0;
}
