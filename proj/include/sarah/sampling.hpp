// Copyright 2026 The sarahnc Authors. All Rights Reserved.
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

#ifndef SARAH_SAMPLING_HPP
#define SARAH_SAMPLING_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/rng.hpp"

namespace sarah {

/// Distinct component indices in strictly increasing order.
class MiniBatch {
 public:
  MiniBatch() = default;

  /// Validates and sorts; throws ContractError on duplicates or out-of-range entries.
  MiniBatch(std::vector<std::size_t> indices, std::size_t n) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (indices_.empty()) throw ContractError("MiniBatch: empty batch");
    if (indices_.back() >= n) throw ContractError("MiniBatch: index out of range");
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
      throw ContractError("MiniBatch: duplicate index");
  }

  /// The whole index set [0, n).
  static MiniBatch full(std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return MiniBatch(std::move(all), n);
  }

  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t operator[](std::size_t k) const { return indices_[k]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  bool operator==(const MiniBatch&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

/// Size-b subset of [0, n), uniform over all C(n, b) subsets.
/// Partial Fisher-Yates over an index array followed by a sort.
inline MiniBatch sample_batch(RngStream& rng, std::size_t n, std::size_t b) {
  if (b < 1 || b > n)
    throw ContractError("sample_batch: need 1 <= b <= n, got b=" + std::to_string(b) +
                        " n=" + std::to_string(n));
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < b && i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(b);
  return MiniBatch(std::move(pool), n);
}

inline MiniBatch sample_batch(RngStream&& rng, std::size_t n, std::size_t b) {
  return sample_batch(rng, n, b);
}

/// b independent uniform indices (duplicates allowed), in draw order.
inline std::vector<std::size_t> sample_with_replacement(RngStream& rng, std::size_t n, std::size_t b) {
  if (n == 0 || b == 0) throw ContractError("sample_with_replacement: n and b must be positive");
  std::vector<std::size_t> out(b);
  for (auto& i : out) i = static_cast<std::size_t>(rng.uniform_index(n));
  return out;
}

/// Size-one reservoir over a stream of candidates: after k offers, each offer
/// is the current pick with probability 1/k.
class ReservoirPick {
 public:
  explicit ReservoirPick(RngStream rng) : rng_(rng) {}

  /// Returns true if the k-th offered item (0-based position `seen()` before
  /// the call) replaces the current pick.
  bool offer() {
    ++seen_;
    if (seen_ == 1 || rng_.uniform_index(seen_) == 0) {
      picked_ = seen_ - 1;
      return true;
    }
    return false;
  }

  std::size_t picked() const noexcept { return picked_; }
  std::size_t seen() const noexcept { return seen_; }

 private:
  RngStream rng_;
  std::size_t seen_ = 0;
  std::size_t picked_ = 0;
};

/// C(n, k) as a double (exact while it fits in 53 bits).
inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

/// Calls f(span of indices) for every size-b subset of [0, n) in lexicographic order.
template <class F>
void for_each_subset(std::size_t n, std::size_t b, F&& f) {
  if (b < 1 || b > n) throw ContractError("for_each_subset: need 1 <= b <= n");
  std::vector<std::size_t> idx(b);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    f(std::span<const std::size_t>(idx));
    std::size_t pos = b;
    while (pos > 0 && idx[pos - 1] == n - b + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t k = pos; k < b; ++k) idx[k] = idx[k - 1] + 1;
  }
}

}  // namespace sarah

#endif  // SARAH_SAMPLING_HPP
