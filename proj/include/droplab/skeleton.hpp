#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "droplab/circuit.hpp"
#include "droplab/geometry.hpp"
#include "droplab/skeleton_constants.hpp"
#include "droplab/tau.hpp"

namespace droplab {

struct ScaleParams {
  double s = 0.0;
  double d = 0.0;
};

/// s = (theta sqrt(pi) / (2 K7))^{1/2} l^{2/3} (log l)^{-1/3},
/// d = 2 theta l^{1/3} (log l)^{-2/3}.
/// Throws DomainError unless l > e and 0 < theta < 1.
ScaleParams scale_params(double l, double theta, double K7 = kSkeletonConstants.K7);

struct HullSkeleton {
  Polygon points;                 ///< w_0 .. w_m, ccw; w_{m+1} = w_0 implied
  std::vector<std::size_t> hull_index;  ///< position of each w_i among the hull extreme points
  double s = 0.0;
  std::vector<std::size_t> long_sides;  ///< i with |w_{i+1} - w_i| >= s sqrt(pi) / (16 K5)
  double K5_used = 0.0;
};

/// Greedy selection along the hull: start at the lexicographically smallest
/// vertex realizing the tau-diameter, keep every extreme point whose
/// tau-distance from the last kept point is at least s.
/// Throws DomainError when diam_tau < 2s ("scale too coarse").
HullSkeleton hull_skeleton(const ConvexHull& hull, double s, const TauNorm& tau,
                           double K5 = kSkeletonConstants.K5);
HullSkeleton hull_skeleton(const DualCircuit& circuit, double s, const TauNorm& tau,
                           double K5 = kSkeletonConstants.K5);

std::vector<std::size_t> long_sides(const Polygon& points, double s, double K5 = kSkeletonConstants.K5);

/// Measured left-hand sides of the four skeleton bounds, and the smallest
/// constants that would make each hold on this instance.
struct SkeletonAudit {
  std::size_t point_count = 0;  ///< m + 1
  double diam = 0.0;
  double s = 0.0;
  double area_defect = 0.0;      ///< |Int(circuit) \ Int(HPath)|
  double hull_distance = 0.0;    ///< sup over Co of dist to HPath
  double functional_gap = 0.0;   ///< W(dCo) - W(HPath)
  double long_side_sum = 0.0;

  double needed_K5() const { return static_cast<double>(point_count) * s / diam; }
  double needed_K6() const { return area_defect / (s * s); }
  double needed_K7() const { return hull_distance * diam / (s * s); }
  double needed_K8() const { return functional_gap * diam / (s * s); }
  /// All four bounds hold with the given constants (strict for the count).
  bool holds(const SkeletonConstants& k) const;
};

SkeletonAudit audit_skeleton(const DualCircuit& circuit, const HullSkeleton& skel, const TauNorm& tau);

struct AnnulusTube {
  HullSkeleton skeleton;
  double d = 0.0;
  std::vector<Point> normals;   ///< outward unit normal of side i (w_i -> w_{i+1})
  std::vector<double> offsets;  ///< (n_i, w_i)
  std::vector<Point> tube_dirs; ///< slab direction t_i per side (unit)
  std::vector<Point> slab_start;  ///< w'_i on the inner line
  std::vector<Point> slab_end;    ///< w''_i on the inner line
  bool inner_empty = false;

  /// Inside every outer half plane and not strictly inside every inner one.
  bool contains(Point z) const;
  /// |(n_i, z) - c_i| <= d.
  bool in_tube(std::size_t i, Point z) const;
};

/// `tube_dirs` empty means each slab direction is its side direction.
/// Throws std::invalid_argument for d <= 0 or fewer than 3 skeleton points.
AnnulusTube annulus_and_tubes(const HullSkeleton& skel, double d, std::vector<Point> tube_dirs = {});

bool circuit_confined(const DualCircuit& circuit, const AnnulusTube& at);

}  // namespace droplab
