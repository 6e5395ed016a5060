#pragma once

#include <span>

#include "droplab/geometry.hpp"
#include "droplab/tau.hpp"

namespace droplab {

struct WulffShape {
  TauNorm tau;
  Polygon polygon;     ///< {t : (t, z) <= tau(z) for all grid z}, ccw
  double area = 0.0;
  Polygon unit_shape;  ///< polygon scaled to unit area
  double wulff_constant = 0.0;  ///< tau-length of the unit-area boundary
};

WulffShape build_wulff(const TauNorm& tau);

/// Point t on the boundary of the Wulff polygon with (t, x) = tau(x); the
/// midpoint of the edge when x is normal to an edge.
/// Throws std::invalid_argument for x = 0.
Point polar_point(const WulffShape& wulff, Point x);

/// Sum of tau over the edge vectors of a closed polygon (closing edge implied).
/// Throws std::invalid_argument for fewer than 3 vertices.
double wulff_functional(std::span<const Point> polygon, const TauNorm& tau);

}  // namespace droplab
