// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NERPRUNE_RNG_H_
#define NERPRUNE_RNG_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace nerprune {

// SplitMix64 stream with its own bounded-integer and real sampling, so that
// every draw is identical across standard libraries and platforms (the
// <random> distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next();

  // Uniform in [0, n); n must be > 0. Unbiased (rejection sampling).
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform in [lo, hi).
  double uniform_real(double lo, double hi);

  // Independent child stream derived from this stream's seed and a name.
  // Does not advance the parent.
  Rng split(std::string_view name) const;

  // Number of calls to next() so far.
  std::uint64_t draws() const { return draws_; }
  std::uint64_t seed() const { return seed_; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace nerprune

#endif  // NERPRUNE_RNG_H_
