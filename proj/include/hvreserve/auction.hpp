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

#include <optional>

#include "hvreserve/money.hpp"

namespace hvr {

/// Top two bids of a single-winner auction. Only (T, S) matter for the
/// clearing price, so full bid lists are never stored.
class BidPair {
 public:
  BidPair() = default;
  /// Throws Error(domain) unless top >= second.
  BidPair(Money top, Money second);

  Money top() const { return top_; }
  Money second() const { return second_; }
  Money gap() const { return Money::from_ticks(top_.ticks() - second_.ticks()); }

  friend bool operator==(const BidPair&, const BidPair&) = default;

 private:
  Money top_;
  Money second_;
};

/// Static reserves configured for an auction. The systemwide floor is always
/// present and strictly positive.
struct StaticReserves {
  Money systemwide = Money::from_ticks(500);  // 0.05
  std::optional<Money> uniform;
  std::optional<Money> deal;

  /// Throws Error(config) when the systemwide floor is zero.
  void validate() const;

  friend bool operator==(const StaticReserves&, const StaticReserves&) = default;
};

struct AuctionOutcome {
  bool sold = false;
  Money clearing_price;  // zero when unsold
  bool blocked = false;  // unsold because the reserve exceeded the top bid

  friend bool operator==(const AuctionOutcome&, const AuctionOutcome&) = default;
};

/// Maximum over every present static reserve.
Money effective_static_reserve(const StaticReserves& reserves);

/// Second-price auction with a hard reserve r:
///   r >  top  -> unsold, blocked
///   r <= top  -> sold at max(second, r)
AuctionOutcome transaction_revenue(Money reserve, const BidPair& bids);

/// Hard reserve combined with a soft reserve (hard <= soft):
///   top <  hard          -> unsold, blocked
///   hard <= top < soft   -> sold at top (first price)
///   top >= soft          -> sold at max(second, soft)
/// Throws Error(config) when hard > soft.
AuctionOutcome transaction_revenue_soft(Money hard, Money soft, const BidPair& bids);

}  // namespace hvr
