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

// Counter-based random streams.
//
// Every draw is a pure function of (key, counter): the j-th output of a
// stream with key k is mix64(k + j * kGolden), j = 1, 2, ... This is the
// SplitMix64 sequence seeded with k, so any SplitMix64 reference gives test
// vectors for the generator core.
//
// Stream keys are derived from (seed, outer, inner, purpose) by chained
// finalization:
//
//   h = mix64(seed ^ kSeedSalt)
//   h = mix64(h + purpose * kPurposeMul)
//   h = mix64(h + outer   * kOuterMul)
//   key = mix64(h + inner * kInnerMul)
//
// so the batch of inner step t in outer iteration s can be replayed from the
// seed and its label alone.

#ifndef SARAH_RNG_HPP
#define SARAH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include "sarah/errors.hpp"

namespace sarah {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kSeedSalt = 0x5851f42d4c957f2dULL;
inline constexpr std::uint64_t kPurposeMul = 0xd1b54a32d192ed03ULL;
inline constexpr std::uint64_t kOuterMul = 0xaef17502108ef2d9ULL;
inline constexpr std::uint64_t kInnerMul = 0xf1357aea2e62a9c5ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// What a stream is used for. Values are part of the reproducibility contract.
enum class StreamPurpose : std::uint64_t {
  kGeneric = 0,
  kBatch = 1,
  kOutputSelect = 2,
  kInit = 3,
  kSubset = 4,
  kSynthetic = 5,
  kPerturbation = 6,
  kSgdIndex = 7,
};

struct StreamLabel {
  std::uint64_t outer = 0;
  std::uint64_t inner = 0;
  StreamPurpose purpose = StreamPurpose::kGeneric;
};

constexpr std::uint64_t derive_stream_key(std::uint64_t seed, const StreamLabel& label) noexcept {
  std::uint64_t h = mix64(seed ^ kSeedSalt);
  h = mix64(h + static_cast<std::uint64_t>(label.purpose) * kPurposeMul);
  h = mix64(h + label.outer * kOuterMul);
  return mix64(h + label.inner * kInnerMul);
}

namespace detail {
__extension__ using u128 = unsigned __int128;
}  // namespace detail

/// A labeled substream of a seed. Copyable value; copies replay the same draws.
class RngStream {
 public:
  constexpr RngStream(std::uint64_t seed, StreamLabel label = {}) noexcept
      : seed_(seed), label_(label), key_(derive_stream_key(seed, label)) {}

  /// Fresh stream of the same seed under another label.
  constexpr RngStream relabel(StreamLabel label) const noexcept { return RngStream(seed_, label); }

  /// Stream whose key is used verbatim (raw SplitMix64 sequence).
  static constexpr RngStream from_key(std::uint64_t key) noexcept {
    RngStream s(0);
    s.key_ = key;
    return s;
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform integer in [0, bound), unbiased (multiply-shift with rejection).
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw ContractError("uniform_index: bound must be positive");
    std::uint64_t x = next_u64();
    detail::u128 m = static_cast<detail::u128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<detail::u128>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes two draws, returns the cosine branch.
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr const StreamLabel& label() const noexcept { return label_; }
  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  StreamLabel label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sarah

#endif  // SARAH_RNG_HPP
