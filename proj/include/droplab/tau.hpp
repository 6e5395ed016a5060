#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "droplab/geometry.hpp"
#include "droplab/lattice.hpp"

namespace droplab {

/// Primitive integer directions (q, r) with 0 <= r <= q <= q_max, gcd = 1,
/// ordered by slope r/q. These span the first octant.
std::vector<SiteCoord> octant_directions(int q_max);

/// Images of v under the 8 lattice symmetries (rotations by quarter turns and
/// reflections), deduplicated.
std::vector<SiteCoord> lattice_images(SiteCoord v);

/// Surface tension model.
///
/// Stores tau of unit vectors along a grid of rational directions in the
/// first octant. Off-grid values are the support function of the convex body
/// {t : (t, u) <= tau(u) for every symmetric image u of a grid direction},
/// which makes the norm homogeneous, convex and lattice symmetric.
class TauNorm {
 public:
  TauNorm() = default;
  /// `values[i]` is tau at the unit vector along `directions[i]`.
  TauNorm(std::vector<SiteCoord> directions, std::vector<double> values,
          std::vector<double> stderrs = {});

  /// tau(u) = c on every direction of the q <= q_max grid.
  static TauNorm isotropic(double c, int q_max = 6);
  /// tau(x) = c (|x_1| + |x_2|).
  static TauNorm l1(double c);

  double operator()(Point x) const;
  double along_axis() const { return (*this)(Point{1.0, 0.0}); }

  /// Same shape, tau(e1) = 1.
  TauNorm normalized() const;

  const std::vector<SiteCoord>& directions() const { return directions_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& stderrs() const { return stderrs_; }
  /// {t : (t,u) <= tau(u) for all grid images u}, counter-clockwise.
  const Polygon& unit_ball_polar() const { return polar_; }

  // Calibration metadata.
  double p = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

 private:
  std::vector<SiteCoord> directions_;
  std::vector<double> values_;
  std::vector<double> stderrs_;
  Polygon polar_;
};

struct ConnectivityEstimate {
  SiteCoord target;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  /// Hits and sample counts per contiguous block of samples (for resampling errors).
  std::vector<std::uint64_t> batch_hits;
  std::vector<std::uint64_t> batch_samples;
  double probability() const { return samples ? static_cast<double>(hits) / samples : 0.0; }
  double std_error() const;
};

/// Monte Carlo estimate of P(0* <-> x*) in the dual configuration for every
/// x in `targets` simultaneously (one dual cluster exploration per sample).
/// Bonds are sampled lazily on the box [-L, L]^2 with L = box_half_width.
/// Throws DomainError for samples < 100 or a box smaller than 2|x|.
std::vector<ConnectivityEstimate> estimate_connectivity(double p, const std::vector<SiteCoord>& targets,
                                                        std::uint64_t samples, std::uint64_t seed,
                                                        int box_half_width);

struct TauEstimate {
  SiteCoord direction;
  double tau = 0.0;     ///< per unit length
  double std_error = 0.0;
  std::vector<double> distances;
  std::vector<double> neg_log_p;
  std::vector<double> neg_log_p_stderr;
};

/// Weighted least-squares slope of -log P(0* <-> (k q, k r)*) against the
/// Euclidean distance k |(q, r)|, over the given multipliers k. The points
/// share samples, so the standard error is a delete-one-batch jackknife when
/// batch counts are available (the regression error otherwise).
/// Throws DomainError when some multiplier has no successes.
TauEstimate fit_tau(SiteCoord direction, const std::vector<int>& multipliers,
                    const std::vector<ConnectivityEstimate>& estimates);

/// Multipliers k with 4 <= k|v| <= 16, at least three of them.
std::vector<int> default_multipliers(SiteCoord v);

struct TauCalibration {
  TauNorm norm;
  std::vector<TauEstimate> estimates;  ///< one per octant grid direction
  TauEstimate vertical;                ///< estimate along e2, for the symmetry check
};

/// Estimate tau on the q <= q_max octant grid plus e2, all from one set of samples.
TauCalibration calibrate_tau(double p, int q_max, std::uint64_t samples, std::uint64_t seed);

/// JSON: {"version", "p", "directions": [[q, r], ...], "tau", "stderr", "samples", "seed"}.
void write_tau_json(std::ostream& out, const TauNorm& norm);
TauNorm read_tau_json(std::istream& in);
TauNorm load_tau_file(const std::string& path);

}  // namespace droplab
