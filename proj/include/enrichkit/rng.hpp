#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

namespace enrichkit {

inline constexpr std::uint64_t kRngIncrement = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. The state walks a fixed-increment counter
/// and every output is a finalizer hash of it, so draw i of stream
/// (seed, domain, index) is a pure function of those four integers.
/// Streams for different (domain, index) pairs are independent, which lets
/// permutation j be generated on any thread with identical results.
class Rng {
public:
  Rng(std::uint64_t seed, std::uint64_t domain, std::uint64_t index)
      : state_(mix64(seed + kRngIncrement * (domain + 1)) ^
               mix64(index + kRngIncrement)) {}

  std::uint64_t next_u64() {
    state_ += kRngIncrement;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold)
        return r % n;
    }
  }

  /// Standard normal deviate (Box-Muller, no state caching).
  double next_gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// In-place Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::span<T> v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

// Stream domains. Keeping them disjoint guarantees that, e.g., the label
// shuffle of permutation j never reuses draws of the gene shuffle of run j.
namespace rng_domain {
inline constexpr std::uint64_t kGseaPermutation = 1;
inline constexpr std::uint64_t kZnullSamplePerm = 2;
inline constexpr std::uint64_t kZnullGenePerm = 3;
inline constexpr std::uint64_t kStudyLabels = 4;
inline constexpr std::uint64_t kStudyGeneShuffle = 5;
inline constexpr std::uint64_t kStudyInnerSeed = 6;
inline constexpr std::uint64_t kSynth = 7;
}  // namespace rng_domain

}  // namespace enrichkit
