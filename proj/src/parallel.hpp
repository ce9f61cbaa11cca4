// Copyright 2026 The Sievebank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIEVEBANK_PARALLEL_HPP_
#define SIEVEBANK_PARALLEL_HPP_

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sievebank {

// 0 means "use the hardware's count".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static contiguous partition of [0, n) across `threads` workers. Each index
// must be processed independently (typically writing its own output slot),
// which makes results identical for every thread count.
inline void parallel_for(size_t n, int threads,
                         const std::function<void(size_t, size_t)>& body) {
  threads = resolve_threads(threads);
  if (n == 0) return;
  size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = w * chunk;
    size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end]() {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace sievebank

#endif  // SIEVEBANK_PARALLEL_HPP_
