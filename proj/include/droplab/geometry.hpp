#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace droplab {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise quarter turn.
constexpr Point perp(Point a) { return {-a.y, a.x}; }

/// Polygon given as a vertex cycle (closing vertex not repeated).
using Polygon = std::vector<Point>;

/// Shoelace signed area; positive for counter-clockwise cycles.
double signed_area(std::span<const Point> poly);
double perimeter(std::span<const Point> poly);

/// Drops a trailing vertex equal to the first one.
Polygon open_cycle(std::span<const Point> poly);

struct ConvexHull {
  Polygon extreme_points;  ///< counter-clockwise, no three collinear
  double perimeter = 0.0;
  double area = 0.0;
};

/// Monotone-chain hull. Throws std::invalid_argument when all points are collinear.
ConvexHull convex_hull(std::span<const Point> points);

double point_segment_distance(Point p, Point a, Point b);

/// Signed distance from p to the line through a, b; positive on the left of a->b.
double signed_line_distance(Point p, Point a, Point b);

/// True when p lies in the closed convex polygon (ccw), with tolerance `eps`.
bool in_convex(std::span<const Point> convex, Point p, double eps = 1e-12);

/// Euclidean distance from p to a closed convex polygon (0 inside).
double distance_to_convex(std::span<const Point> convex, Point p);

/// Sutherland-Hodgman clip of `subject` by the convex ccw polygon `clip`.
/// For subjects with winding number +1 on their interior the signed area of
/// the result is the area of the intersection.
Polygon clip_to_convex(std::span<const Point> subject, std::span<const Point> clip);

/// Intersection of half planes {z : dot(n_i, z) <= c_i} clipped to the box
/// [-bound, bound]^2, as a ccw polygon (possibly empty).
Polygon halfplane_intersection(std::span<const Point> normals, std::span<const double> offsets,
                               double bound);

/// Euclidean diameter of a convex ccw polygon by rotating calipers.
double hull_diameter(std::span<const Point> hull);

/// max over polygon vertices of dot(v, u).
double support(std::span<const Point> convex, Point u);

}  // namespace droplab
