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
#include <boost/math/distributions/normal.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hvreserve/error.hpp"
#include "hvreserve/simulator.hpp"

namespace hvr {

void SyntheticConfig::validate() const {
  if (n_records == 0) throw Error(ErrorKind::config, "n_records must be positive");
  if (!(high_value_fraction > 0.0 && high_value_fraction < 1.0)) {
    throw Error(ErrorKind::config, "high_value_fraction must lie in (0, 1)");
  }
  if (!(feature_signal_strength >= 0.0 && feature_signal_strength <= 1.0)) {
    throw Error(ErrorKind::config, "feature_signal_strength must lie in [0, 1]");
  }
  if (high_value_threshold.is_zero() || !(high_value_threshold < outlier_cap)) {
    throw Error(ErrorKind::config, "high_value_threshold must be positive and below outlier_cap");
  }
  if (!(low_log_sd > 0.0) || !(high_log_sd > 0.0) || !(gap_mean_fraction > 0.0)) {
    throw Error(ErrorKind::config, "distribution spreads must be positive");
  }
  if (sites == 0 || buyer_seats == 0) {
    throw Error(ErrorKind::config, "sites and buyer_seats must be positive");
  }
}

namespace {

// Portable samplers on top of mt19937_64: the standard distributions are not
// specified bit-for-bit, and logs must be byte-identical everywhere.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double open_uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool bernoulli(double p) { return uniform() < p; }
  double normal() {
    const double u1 = open_uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double exponential() { return -std::log(open_uniform()); }

 private:
  std::mt19937_64 rng_;
};

template <class... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

constexpr const char* kSizes[] = {"300x250", "728x90", "320x50", "160x600", "300x600", "970x250"};
constexpr const char* kGenders[] = {"f", "m", "u"};
constexpr const char* kDevices[] = {"desktop", "mobile", "tablet"};
constexpr const char* kBrowsers[] = {"chrome", "safari", "firefox", "edge", "other"};
constexpr const char* kLayouts[] = {"standard", "wide", "mobile"};
constexpr const char* kPositions[] = {"atf", "btf", "sidebar", "unknown"};
constexpr const char* kColos[] = {"bf1", "gq1", "ne1", "sg3", "ir2"};
constexpr const char* kGeos[] = {"US-CA", "US-NY", "US-TX", "US-FL", "US-WA", "US-IL", "US-MA",
                                 "US-GA", "US-OH", "US-PA", "CA-ON", "CA-BC", "GB", "DE",
                                 "FR", "JP", "AU", "BR", "IN", "MX"};

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Money price(double dollars) {
  return Money::from_ticks(std::max<std::int64_t>(100, std::llround(dollars * Money::kScale)));
}

}  // namespace

SyntheticLogs generate_synthetic_logs(const SyntheticConfig& c) {
  c.validate();
  Sampler rng(c.seed);
  const double s = c.feature_signal_strength;
  const double threshold = c.high_value_threshold.to_double();
  const double cap = c.outlier_cap.to_double();

  // per-site quality, with site names whose sort order is unrelated to quality
  std::vector<double> site_quality(c.sites);
  for (auto& q : site_quality) q = rng.normal();
  {
    double mean = 0.0;
    double sq = 0.0;
    for (double q : site_quality) mean += q;
    mean /= static_cast<double>(c.sites);
    for (double q : site_quality) sq += (q - mean) * (q - mean);
    const double sd = c.sites > 1 ? std::sqrt(sq / static_cast<double>(c.sites)) : 1.0;
    for (auto& q : site_quality) q = sd > 0.0 ? (q - mean) / sd : 0.0;
  }

  // seats: the first 90% are mapped round-robin onto the nine named groups,
  // the rest stay unmapped ("notag")
  std::map<std::string, std::string> seat_groups;
  const std::size_t mapped = std::max<std::size_t>(1, c.buyer_seats * 9 / 10);
  for (std::size_t k = 0; k < mapped; ++k) {
    seat_groups.emplace(fmt("seat%03zu", k), std::string(kBuyerGroups[k % 9]));
  }
  // competition effect per group index (notag last)
  constexpr double kGroupCompetition[10] = {-0.8, 0.4, 0.9, 0.6, -0.3, 1.1, 0.2, -0.6, 0.0, -1.0};

  // membership: high iff s*v + (1-s)*e >= c_w, with P(high) = high_value_fraction
  const double w_sd = std::sqrt(s * s + (1.0 - s) * (1.0 - s));
  const double c_w =
      w_sd * boost::math::quantile(boost::math::normal_distribution<>(), 1.0 - c.high_value_fraction);

  using namespace std::chrono;
  const sys_days start = year{2017} / March / 1;

  SyntheticLogs out;
  out.groups = BuyerGroupMap(seat_groups);
  out.records.reserve(c.n_records);
  for (std::size_t i = 0; i < c.n_records; ++i) {
    RawRecord r;
    r.record_id = fmt("r%08zu", i);

    const std::size_t site = rng.index(c.sites);
    const double v = 0.55 * site_quality[site] + 0.835 * rng.normal();  // inventory value
    const bool high = s * v + (1.0 - s) * rng.normal() >= c_w;
    const double depth = rng.normal();  // how far above the threshold a high-value bid lands

    // publisher
    r.site_tld = fmt("site%04zu.example", (site * 7919) % c.sites);
    r.ad_section = fmt("sec%02zu", rng.index(40));
    r.ssp_host = fmt("ssp%zu", rng.index(8));
    r.layout = kLayouts[rng.index(3)];
    r.ad_position = kPositions[rng.index(4)];
    const bool premium = rng.bernoulli(logistic(1.2 * v + 0.8 * depth - 1.0));
    r.ad_size = premium ? kSizes[4 + rng.index(2)] : kSizes[rng.index(4)];

    // user
    r.age = std::clamp(static_cast<int>(std::lround(38.0 + 4.0 * v + 13.0 * rng.normal())), 13, 90);
    r.gender = kGenders[rng.index(3)];
    r.device_type = kDevices[rng.index(3)];
    r.geo = kGeos[rng.index(std::size(kGeos))];
    r.browser = kBrowsers[rng.index(5)];
    r.colo = kColos[rng.index(5)];
    r.page_views = std::llround(std::exp(2.0 + 0.5 * v + 0.4 * rng.normal()));
    const std::size_t n_prev = 2 + rng.index(7);
    for (std::size_t k = 0; k < n_prev; ++k) {
      r.prev_clearing_prices.push_back(price(std::exp(0.2 + 0.9 * v + 0.2 * rng.normal())));
    }
    const std::size_t n_wins = rng.index(4);
    for (std::size_t k = 0; k < n_wins; ++k) {
      r.prev_win_stats.push_back(
          price(std::exp(0.4 + 0.8 * v + 0.5 * depth + 0.25 * rng.normal())));
    }
    r.visit_count = 1 + static_cast<std::int64_t>(rng.index(30));
    r.impressions = r.page_views + static_cast<std::int64_t>(rng.index(50));
    r.clicks = static_cast<std::int64_t>(rng.index(4));
    r.search_query = rng.bernoulli(0.4) ? fmt("q%03zu", rng.index(200)) : std::string();
    r.app_info = r.device_type == "mobile" && rng.bernoulli(0.5) ? fmt("app%02zu", rng.index(30))
                                                                  : std::string();

    // buyer
    const std::size_t seat = rng.index(c.buyer_seats);
    r.buyer_seat = fmt("seat%03zu", seat);
    r.winning_demand_seat = fmt("wds%03zu", rng.index(c.buyer_seats));

    // temporal
    const auto day = start + days{static_cast<int>(rng.index(28))};
    const year_month_day ymd{day};
    r.date = fmt("%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                 static_cast<unsigned>(ymd.day()));
    r.dow = static_cast<int>(weekday{day}.c_encoding());
    r.hour = static_cast<int>(rng.index(24));

    // bids
    double top;
    if (high) {
      // softplus keeps the excess monotone in depth and non-negative
      const double x = 1.5 * (s * depth + (1.0 - s) * rng.normal());
      top = threshold * std::exp(c.high_log_sd * (std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)))));
    } else {
      top = threshold;
      for (int attempt = 0; attempt < 64 && top >= threshold; ++attempt) {
        top = std::exp(c.low_log_mean + 0.3 * s * v + c.low_log_sd * rng.normal());
      }
      top = std::min(top, threshold - 0.0001);
    }
    top = std::min(top, cap);
    const std::size_t group = out.groups.group_index(r.buyer_seat);
    const double competition_obs =
        0.7 * std::sin(2.0 * std::numbers::pi * r.hour / 24.0) + kGroupCompetition[group];
    const double competition = s * competition_obs + (1.0 - s) * rng.normal();
    const double gap_fraction =
        std::min(1.0, c.gap_mean_fraction * std::exp(-0.6 * competition) * rng.exponential());
    const Money t = price(top);
    const Money second = Money::from_ticks(
        std::clamp<std::int64_t>(std::llround((1.0 - gap_fraction) * t.ticks()), 0, t.ticks()));
    r.bids = BidPair(t, second);

    // static reserves
    r.reserves.systemwide = Money::from_ticks(500);
    if (rng.bernoulli(0.3)) {
      constexpr std::int64_t kUniform[] = {1000, 2500, 5000};
      r.reserves.uniform = Money::from_ticks(kUniform[rng.index(3)]);
    }
    if (rng.bernoulli(0.03)) r.reserves.deal = Money::from_ticks(10000);

    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace hvr
