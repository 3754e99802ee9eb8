#pragma once

#include <cstdint>
#include <limits>

namespace nswxos {

/// SplitMix64: the k-th output (k = 1, 2, ...) is mix(seed + k * 0x9E3779B97F4A7C15).
///
/// Every random draw in the library goes through this generator so that traces
/// are reproducible bit-for-bit on any platform; the std distributions are not.
/// Derived draws:
///   coin()            top bit of the next output
///   uniform01()       (next() >> 11) * 2^-53, in [0, 1)
///   below(bound)      Lemire multiply-shift with rejection, unbiased in [0, bound)
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  bool coin() { return (next() >> 63) != 0; }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_open_closed() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
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

 private:
  std::uint64_t state_;
};

}  // namespace nswxos
