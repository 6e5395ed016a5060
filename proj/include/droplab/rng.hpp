#pragma once

#include <cstdint>
#include <limits>

namespace droplab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// The k-th output (k = 0, 1, ...) of a SplitMix64 stream seeded with `seed`.
/// Random access into the stream is what makes bond states addressable
/// without materializing a whole configuration.
constexpr std::uint64_t stream_word(std::uint64_t seed, std::uint64_t k) noexcept {
  return mix64(seed + (k + 1) * kGoldenGamma);
}

/// Derived seed for replica `k` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) noexcept {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + mix64(k + 0x3c6ef372fe94f82bULL));
}

/// Sequential SplitMix64 engine; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_open0() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal deviate (Box-Muller, both outputs used).
  double normal() noexcept;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace droplab
