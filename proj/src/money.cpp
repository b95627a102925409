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

#include "hvreserve/money.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "hvreserve/error.hpp"

namespace hvr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::domain: return "domain";
    case ErrorKind::schema_mismatch: return "schema_mismatch";
    case ErrorKind::training: return "training";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

namespace {

std::string render_ticks(std::int64_t ticks) {
  const bool negative = ticks < 0;
  // avoid overflow on INT64_MIN by working in unsigned space
  const std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(ticks)
                                     : static_cast<std::uint64_t>(ticks);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%llu.%04llu", negative ? "-" : "",
                static_cast<unsigned long long>(mag / Money::kScale),
                static_cast<unsigned long long>(mag % Money::kScale));
  return buf;
}

}  // namespace

Money Money::from_ticks(std::int64_t ticks) {
  if (ticks < 0) {
    throw Error(ErrorKind::domain, "money amount must be non-negative");
  }
  Money m;
  m.ticks_ = ticks;
  return m;
}

Money Money::from_double(double dollars) {
  if (!std::isfinite(dollars)) {
    throw Error(ErrorKind::domain, "money amount must be finite");
  }
  const double scaled = std::round(dollars * kScale);
  if (scaled < 0) {
    throw Error(ErrorKind::domain, "money amount must be non-negative");
  }
  if (scaled >= 9.2e18) {
    throw Error(ErrorKind::domain, "money amount out of range");
  }
  return from_ticks(static_cast<std::int64_t>(scaled));
}

Money Money::parse(std::string_view text) {
  const auto fail = [&] {
    return Error(ErrorKind::domain, "invalid money literal '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();
  const auto dot = text.find('.');
  const auto whole = text.substr(0, dot);
  std::int64_t units = 0;
  if (whole.empty()) throw fail();
  auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), units);
  if (ec != std::errc{} || p != whole.data() + whole.size() || units < 0) throw fail();
  std::int64_t frac = 0;
  if (dot != std::string_view::npos) {
    const auto digits = text.substr(dot + 1);
    if (digits.empty() || digits.size() > kFractionDigits) throw fail();
    for (char c : digits) {
      if (c < '0' || c > '9') throw fail();
    }
    std::from_chars(digits.data(), digits.data() + digits.size(), frac);
    for (auto i = digits.size(); i < kFractionDigits; ++i) frac *= 10;
  }
  if (units > (std::numeric_limits<std::int64_t>::max() - frac) / kScale) throw fail();
  return from_ticks(units * kScale + frac);
}

std::string Money::to_string() const {
  if (is_unbounded()) return "inf";
  return render_ticks(ticks_);
}

Money& Money::operator+=(Money other) {
  if (__builtin_add_overflow(ticks_, other.ticks_, &ticks_)) {
    throw Error(ErrorKind::domain, "money addition overflow");
  }
  return *this;
}

MoneyDelta operator-(Money a, Money b) {
  return MoneyDelta::from_ticks(a.ticks_ - b.ticks_);
}

Money Money::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::domain, "money scale factor must be finite and non-negative");
  }
  if (is_unbounded()) return *this;
  return from_ticks(std::llround(static_cast<double>(ticks_) * factor));
}

std::string MoneyDelta::to_string() const { return render_ticks(ticks_); }

MoneyDelta& MoneyDelta::operator+=(MoneyDelta other) {
  if (__builtin_add_overflow(ticks_, other.ticks_, &ticks_)) {
    throw Error(ErrorKind::domain, "money delta overflow");
  }
  return *this;
}

}  // namespace hvr
