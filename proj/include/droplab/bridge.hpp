#pragma once

#include <cstdint>
#include <vector>

#include "droplab/geometry.hpp"
#include "droplab/stats.hpp"

namespace droplab {

struct BridgePath {
  int n_steps = 0;
  std::vector<double> values;  ///< n_steps + 1 entries, both ends exactly 0
  std::uint64_t seed = 0;
};

/// Gaussian walk with step variance 1/n pinned by B_k = W_k - (k/n) W_n.
/// Throws DomainError for n < 2.
BridgePath sample_bridge(int n, std::uint64_t seed);

struct WrappedContour {
  Polygon points;  ///< n + 1 points, last == first
  double l = 0.0;
};

/// Number of bridge steps used at scale l.
int bridge_resolution(double l);

/// Point k at angle 2 pi k / n and radius l + sqrt(l) values[k].
/// Throws DomainError for l < 2, a coarse bridge (n < 64 ceil(l)) or a
/// non-positive radius.
WrappedContour wrap(const BridgePath& bridge, double l);

/// MLR of the contour against its own hull.
double contour_mlr(const WrappedContour& contour);

struct BridgeRow {
  double l = 0.0;
  int n = 0;
  int replicas = 0;
  double mean_mlr = 0.0;
  double std_error = 0.0;
};

struct BridgeScan {
  std::vector<BridgeRow> rows;
  LinearFit fit;  ///< log mean MLR against log(l^{1/3} (log l)^{2/3})
};

/// Replica r at scale index i uses derive_seed(derive_seed(seed, i), r).
/// Throws DomainError for fewer than 30 replicas, a non increasing l list or
/// fewer than 3 scales.
BridgeScan bridge_mlr_scan(const std::vector<double>& l_list, int replicas, std::uint64_t seed,
                           unsigned threads = 1);

}  // namespace droplab
