#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

#include "brf/error.hpp"

namespace brf {

// SplitMix64 finalizer. Bijective on 64-bit values.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Child seed for stream `index` of a master seed. Used for per-tree and
// per-fold streams so each one is reproducible on its own, independent of
// the order or the thread it runs on.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

// Seedable deterministic generator. The engine is std::mt19937_64, whose
// output sequence is fixed by the C++ standard; bounded integers and reals
// are derived here rather than through <random> distributions, which are
// implementation-defined. Identical seeds give identical streams on every
// conforming toolchain.
//
// Single-owner: do not share one instance between threads.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection, so
  // the result is unbiased for every bound.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw argument_error("RandomSource::below: bound must be positive");
    unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  // Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Fisher-Yates, back to front.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(values[i - 1], values[j]);
    }
  }

  RandomSource child(std::uint64_t index) const { return RandomSource(derive_seed(seed_, index)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace brf
