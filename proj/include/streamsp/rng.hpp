#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>

namespace streamsp {

// Portable pseudorandom generator. Every random decision in the toolkit
// (instance generation, message initialization, sweep orders, WalkSAT moves)
// goes through this type so results are bit-identical across platforms and
// standard library implementations.
//
// State: four 64-bit words s0..s3 (xoshiro256**), seeded by four successive
// outputs of SplitMix64 started at the user seed:
//
//   splitmix64(x):  x += 0x9e3779b97f4a7c15
//                   z = x
//                   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//                   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//                   return z ^ (z >> 31)
//
//   next():         out = rotl(s1 * 5, 7) * 9
//                   t   = s1 << 17
//                   s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
//                   s2 ^= t;  s3 = rotl(s3, 45)
//                   return out
//
// Derived draws:
//   uniform()   = (next() >> 11) * 2^-53                       in [0, 1)
//   below(n)    = first r = next() with r >= (2^64 - n) mod n,
//                 returned as r mod n                          in [0, n)
//   coin()      = next() >> 63
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type next() noexcept;
  result_type operator()() noexcept { return next(); }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool coin() noexcept { return (next() >> 63) != 0; }
  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  // Fisher-Yates from the back: for i = size-1 down to 1, swap(i, below(i+1)).
  template <typename T> void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

private:
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& x) noexcept;

// Order-sensitive hash of a list of words, used to derive independent
// per-instance and per-attempt seeds: h = 0; for w: h = splitmix64(h ^ w).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept;

} // namespace streamsp
