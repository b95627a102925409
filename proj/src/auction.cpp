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

#include "hvreserve/auction.hpp"

#include <algorithm>

#include "hvreserve/error.hpp"

namespace hvr {

BidPair::BidPair(Money top, Money second) : top_(top), second_(second) {
  if (top < second) {
    throw Error(ErrorKind::domain, "bid pair requires top >= second (top=" + top.to_string() +
                                       ", second=" + second.to_string() + ")");
  }
}

void StaticReserves::validate() const {
  if (systemwide.is_zero()) {
    throw Error(ErrorKind::config, "systemwide reserve must be strictly positive");
  }
}

Money effective_static_reserve(const StaticReserves& reserves) {
  Money out = reserves.systemwide;
  if (reserves.uniform) out = std::max(out, *reserves.uniform);
  if (reserves.deal) out = std::max(out, *reserves.deal);
  return out;
}

AuctionOutcome transaction_revenue(Money reserve, const BidPair& bids) {
  if (reserve > bids.top()) {
    return {.sold = false, .clearing_price = Money{}, .blocked = true};
  }
  return {.sold = true, .clearing_price = std::max(bids.second(), reserve), .blocked = false};
}

AuctionOutcome transaction_revenue_soft(Money hard, Money soft, const BidPair& bids) {
  if (hard > soft) {
    throw Error(ErrorKind::config, "hard reserve " + hard.to_string() +
                                       " exceeds soft reserve " + soft.to_string());
  }
  if (bids.top() < hard) {
    return {.sold = false, .clearing_price = Money{}, .blocked = true};
  }
  if (bids.top() < soft) {
    return {.sold = true, .clearing_price = bids.top(), .blocked = false};
  }
  return {.sold = true, .clearing_price = std::max(bids.second(), soft), .blocked = false};
}

}  // namespace hvr
