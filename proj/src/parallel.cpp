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

#include "hvreserve/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace hvr {

namespace {
std::atomic<std::size_t> g_threads{0};
}

void set_thread_count(std::size_t threads) { g_threads = threads; }

std::size_t thread_count() {
  const auto n = g_threads.load();
  if (n != 0) return n;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::size_t shard_count(std::size_t n, std::size_t min_per_shard) {
  if (n == 0) return 0;
  const std::size_t by_size = (n + min_per_shard - 1) / std::max<std::size_t>(1, min_per_shard);
  return std::clamp<std::size_t>(by_size, 1, thread_count());
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                  std::size_t min_per_shard) {
  const std::size_t shards = shard_count(n, min_per_shard);
  if (shards == 0) return;
  const auto bounds = [&](std::size_t s) { return n * s / shards; };
  if (shards == 1) {
    body(0, 0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(shards);
  {
    std::vector<std::jthread> workers;
    workers.reserve(shards - 1);
    for (std::size_t s = 1; s < shards; ++s) {
      workers.emplace_back([&, s] {
        try {
          body(s, bounds(s), bounds(s + 1));
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    try {
      body(0, 0, bounds(1));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hvr
