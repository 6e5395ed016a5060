#include "droplab/bridge.hpp"

#include <cmath>
#include <numbers>
#include <thread>

#include "droplab/errors.hpp"
#include "droplab/rng.hpp"
#include "droplab/roughness.hpp"

namespace droplab {

BridgePath sample_bridge(int n, std::uint64_t seed) {
  if (n < 2) throw DomainError("sample_bridge: n must be at least 2");
  BridgePath b;
  b.n_steps = n;
  b.seed = seed;
  b.values.assign(static_cast<std::size_t>(n) + 1, 0.0);
  SplitMix64 rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 1; k <= n; ++k) b.values[k] = b.values[k - 1] + sd * rng.normal();
  const double end = b.values[n];
  for (int k = 1; k < n; ++k) b.values[k] -= (static_cast<double>(k) / n) * end;
  b.values[n] = 0.0;
  return b;
}

int bridge_resolution(double l) { return 64 * static_cast<int>(std::ceil(l)); }

WrappedContour wrap(const BridgePath& bridge, double l) {
  if (!(l >= 2.0)) throw DomainError("wrap: l must be at least 2");
  const int n = bridge.n_steps;
  if (n < bridge_resolution(l)) throw DomainError("wrap: bridge too coarse for this l");
  WrappedContour c;
  c.l = l;
  c.points.reserve(static_cast<std::size_t>(n) + 1);
  const double amp = std::sqrt(l);
  for (int k = 0; k < n; ++k) {
    const double r = l + amp * bridge.values[k];
    if (!(r > 0)) throw DomainError("wrap: non-positive radius");
    const double a = 2.0 * std::numbers::pi * k / n;
    c.points.push_back({r * std::cos(a), r * std::sin(a)});
  }
  c.points.push_back(c.points.front());
  return c;
}

double contour_mlr(const WrappedContour& contour) {
  const Polygon open = open_cycle(contour.points);
  const ConvexHull hull = convex_hull(open);
  return mlr(open, hull);
}

BridgeScan bridge_mlr_scan(const std::vector<double>& l_list, int replicas, std::uint64_t seed,
                           unsigned threads) {
  if (replicas < 30) throw DomainError("bridge_mlr_scan: need at least 30 replicas");
  if (l_list.size() < 3) throw DomainError("bridge_mlr_scan: need at least 3 scales");
  for (std::size_t i = 1; i < l_list.size(); ++i)
    if (!(l_list[i] > l_list[i - 1])) throw DomainError("bridge_mlr_scan: l list must increase");
  if (threads == 0) threads = 1;

  BridgeScan scan;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < l_list.size(); ++i) {
    const double l = l_list[i];
    const int n = bridge_resolution(l);
    const std::uint64_t scale_seed = derive_seed(seed, i);
    std::vector<double> values(static_cast<std::size_t>(replicas));
    auto work = [&](unsigned t) {
      for (int r = static_cast<int>(t); r < replicas; r += static_cast<int>(threads))
        values[r] = contour_mlr(wrap(sample_bridge(n, derive_seed(scale_seed, r)), l));
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    BridgeRow row{l, n, replicas, mean(values), standard_error(values)};
    scan.rows.push_back(row);
    xs.push_back(std::log(std::cbrt(l) * std::pow(std::log(l), 2.0 / 3.0)));
    ys.push_back(std::log(row.mean_mlr));
  }
  scan.fit = least_squares(xs, ys);
  return scan;
}

}  // namespace droplab
