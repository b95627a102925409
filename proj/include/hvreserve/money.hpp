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

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace hvr {

class MoneyDelta;

/// Non-negative CPM amount stored as an integer count of 1/10000 dollars.
///
/// All ledger arithmetic happens on the integer tick count, so sums are
/// associative and independent of evaluation order. Conversion from double
/// rounds half away from zero to the nearest tick.
class Money {
 public:
  static constexpr std::int64_t kScale = 10000;
  static constexpr int kFractionDigits = 4;

  constexpr Money() = default;

  static Money from_ticks(std::int64_t ticks);
  static Money from_double(double dollars);
  /// Parses a plain decimal ("12", "0.05", "3.1415"); at most 4 fraction digits.
  static Money parse(std::string_view text);

  /// Sentinel used for "never sells" reserves. Compares above every real price.
  static constexpr Money unbounded() {
    Money m;
    m.ticks_ = std::numeric_limits<std::int64_t>::max();
    return m;
  }

  constexpr std::int64_t ticks() const { return ticks_; }
  constexpr bool is_zero() const { return ticks_ == 0; }
  constexpr bool is_unbounded() const { return ticks_ == unbounded().ticks_; }
  double to_double() const { return static_cast<double>(ticks_) / kScale; }
  /// Fixed 4-digit rendering, e.g. "12.0500". Unbounded renders as "inf".
  std::string to_string() const;

  Money& operator+=(Money other);
  friend Money operator+(Money a, Money b) { return a += b; }
  friend MoneyDelta operator-(Money a, Money b);

  /// Scales by a non-negative factor, rounding to the nearest tick.
  Money scaled(double factor) const;

  friend constexpr auto operator<=>(Money, Money) = default;
  friend constexpr bool operator==(Money, Money) = default;

 private:
  std::int64_t ticks_ = 0;
};

/// Signed difference of two Money amounts (lift, segment deltas).
class MoneyDelta {
 public:
  constexpr MoneyDelta() = default;
  static constexpr MoneyDelta from_ticks(std::int64_t ticks) {
    MoneyDelta d;
    d.ticks_ = ticks;
    return d;
  }

  constexpr std::int64_t ticks() const { return ticks_; }
  double to_double() const { return static_cast<double>(ticks_) / Money::kScale; }
  std::string to_string() const;

  MoneyDelta& operator+=(MoneyDelta other);
  friend MoneyDelta operator+(MoneyDelta a, MoneyDelta b) { return a += b; }

  friend constexpr auto operator<=>(MoneyDelta, MoneyDelta) = default;
  friend constexpr bool operator==(MoneyDelta, MoneyDelta) = default;

 private:
  std::int64_t ticks_ = 0;
};

}  // namespace hvr
