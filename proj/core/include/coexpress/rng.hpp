// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace coexpress {

/// splitmix64 step; used for seeding and seed derivation.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derive an independent per-stage seed from a root seed and a stage name.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) noexcept;

/// xoshiro256** generator with portable distributions.
///
/// The standard library distributions are implementation-defined, so every
/// draw used by the toolkit goes through the members below to keep results
/// identical across platforms and compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal deviate (Marsaglia polar method).
  double normal() noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace coexpress
