// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded draws with a fixed algorithm, so results do not depend on the
// standard library's distribution implementations.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace radq::detail {

// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

// Fisher-Yates, last index first.
template <typename T>
void shuffle(std::span<T> items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace radq::detail
