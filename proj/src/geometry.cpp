#include "droplab/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace droplab {

double signed_area(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

double perimeter(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += norm(poly[(i + 1) % n] - poly[i]);
  return s;
}

Polygon open_cycle(std::span<const Point> poly) {
  Polygon out(poly.begin(), poly.end());
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

ConvexHull convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(),
            [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw std::invalid_argument("convex_hull: fewer than 3 distinct points");

  Polygon h(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p - h[k - 2]) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Point& p = pts[i];
    while (k >= t && cross(h[k - 1] - h[k - 2], p - h[k - 2]) <= 0) --k;
    h[k++] = p;
  }
  h.resize(k - 1);
  if (h.size() < 3) throw std::invalid_argument("convex_hull: all points collinear");

  ConvexHull out;
  out.area = signed_area(h);
  out.perimeter = perimeter(h);
  out.extreme_points = std::move(h);
  return out;
}

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double signed_line_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  return cross(ab, p - a) / norm(ab);
}

bool in_convex(std::span<const Point> convex, Point p, double eps) {
  const std::size_t n = convex.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = convex[i];
    const Point b = convex[(i + 1) % n];
    if (a == b) continue;
    if (signed_line_distance(p, a, b) < -eps) return false;
  }
  return true;
}

double distance_to_convex(std::span<const Point> convex, Point p) {
  const std::size_t n = convex.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return norm(p - convex[0]);
  if (n >= 3 && in_convex(convex, p, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, convex[i], convex[(i + 1) % n]));
  return best;
}

namespace {

// Keep the part of `poly` where side(z) >= 0, side affine.
template <typename Side>
Polygon clip_halfplane(const Polygon& poly, Side side) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Point cur = poly[i];
    const Point nxt = poly[(i + 1) % n];
    const double sc = side(cur);
    const double sn = side(nxt);
    if (sc >= 0) out.push_back(cur);
    if ((sc >= 0) != (sn >= 0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

}  // namespace

Polygon clip_to_convex(std::span<const Point> subject, std::span<const Point> clip) {
  Polygon out(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t j = 0; j < m && !out.empty(); ++j) {
    const Point a = clip[j];
    const Point b = clip[(j + 1) % m];
    if (a == b) continue;
    const Point ab = b - a;
    out = clip_halfplane(out, [&](Point z) { return cross(ab, z - a); });
  }
  return out;
}

Polygon halfplane_intersection(std::span<const Point> normals, std::span<const double> offsets,
                               double bound) {
  Polygon poly{{-bound, -bound}, {bound, -bound}, {bound, bound}, {-bound, bound}};
  for (std::size_t i = 0; i < normals.size() && !poly.empty(); ++i) {
    const Point n = normals[i];
    const double c = offsets[i];
    poly = clip_halfplane(poly, [&](Point z) { return c - dot(n, z); });
  }
  // Drop near-duplicate consecutive vertices produced by clipping through vertices.
  Polygon out;
  for (const Point& p : poly)
    if (out.empty() || norm(p - out.back()) > 1e-13) out.push_back(p);
  while (out.size() > 1 && norm(out.front() - out.back()) <= 1e-13) out.pop_back();
  return out;
}

double hull_diameter(std::span<const Point> hull) {
  const std::size_t n = hull.size();
  if (n == 0) return 0.0;
  if (n == 1) return 0.0;
  if (n == 2) return norm(hull[1] - hull[0]);
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = hull[i];
    const Point b = hull[(i + 1) % n];
    const Point ab = b - a;
    while (cross(ab, hull[(j + 1) % n] - a) > cross(ab, hull[j] - a)) j = (j + 1) % n;
    best = std::max({best, norm(hull[j] - a), norm(hull[j] - b)});
  }
  return best;
}

double support(std::span<const Point> convex, Point u) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Point& v : convex) best = std::max(best, dot(v, u));
  return best;
}

}  // namespace droplab
