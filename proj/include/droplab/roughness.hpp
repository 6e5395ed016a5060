#pragma once

#include <optional>
#include <span>

#include "droplab/circuit.hpp"
#include "droplab/geometry.hpp"
#include "droplab/tau.hpp"
#include "droplab/wulff.hpp"

namespace droplab {

struct RoughnessReport {
  double alr = 0.0;
  double mlr = 0.0;
  double diam = 0.0;
  double diam_tau = 0.0;
  std::optional<double> hausdorff_to_wulff;
};

/// Hull of the circuit vertex positions. Throws std::invalid_argument for
/// fewer than 4 vertices.
ConvexHull convex_hull(const DualCircuit& circuit);

/// |Co \ Int| / |dCo| for a closed polyline (closing edge implied).
double alr(std::span<const Point> contour, const ConvexHull& hull);
double alr(const DualCircuit& circuit);

/// Max over contour vertices of the distance to the hull boundary.
double mlr(std::span<const Point> contour, const ConvexHull& hull);
double mlr(const DualCircuit& circuit);

struct Diameters {
  double diam = 0.0;
  double diam_tau = 0.0;
};

/// max over pairs of points of tau(a - b). Only the widths of the point set
/// along the vertices of tau's polar polygon are scanned.
double tau_diameter(std::span<const Point> points, const TauNorm& tau);
/// Indices i such that tau(points[j] - points[i]) or tau(points[i] - points[j])
/// is at least dt - tol for some j, ascending.
std::vector<std::size_t> tau_diameter_ends(std::span<const Point> points, const TauNorm& tau, double dt,
                                           double tol);

Diameters diameters(const ConvexHull& hull, const TauNorm& tau);
Diameters diameters(const DualCircuit& circuit, const TauNorm& tau);

/// Hausdorff distance between the boundaries of two convex polygons (ccw),
/// computed exactly from their support functions.
double convex_hausdorff(std::span<const Point> a, std::span<const Point> b);

/// inf over translations x of the Hausdorff distance between dCo and
/// x + d(l K1). Nelder-Mead from centroid alignment, step tolerance 1e-3.
double hausdorff_to_wulff(const ConvexHull& hull, const WulffShape& wulff, double l);

RoughnessReport roughness(const DualCircuit& circuit, const TauNorm& tau);

}  // namespace droplab
