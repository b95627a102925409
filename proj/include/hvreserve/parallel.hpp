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

#include <cstddef>
#include <functional>

namespace hvr {

/// Worker count used by every parallel loop in the library. Defaults to the
/// machine's hardware concurrency; results never depend on this value.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Splits [0, n) into at most thread_count() contiguous shards and runs
/// body(shard, begin, end) for each. Shard boundaries depend only on n and the
/// shard count, so per-shard partial results can be merged deterministically.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t shard, std::size_t begin,
                                           std::size_t end)>& body,
                  std::size_t min_per_shard = 1024);

/// Number of shards parallel_for will use for a loop of size n.
std::size_t shard_count(std::size_t n, std::size_t min_per_shard = 1024);

}  // namespace hvr
