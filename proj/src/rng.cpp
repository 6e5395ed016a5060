#include "droplab/rng.hpp"

#include <cmath>
#include <numbers>

namespace droplab {

std::uint64_t SplitMix64::below(std::uint64_t n) noexcept {
  if (n == 0) return 0;
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    const auto low = static_cast<std::uint64_t>(m);
    if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
  }
}

double SplitMix64::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open0();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace droplab
