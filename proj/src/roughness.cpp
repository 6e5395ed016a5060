#include "droplab/roughness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace droplab {

ConvexHull convex_hull(const DualCircuit& circuit) {
  if (circuit.size() < 4) throw std::invalid_argument("convex_hull: circuit has fewer than 4 vertices");
  const auto pts = circuit.points();
  return convex_hull(std::span<const Point>(pts));
}

double alr(std::span<const Point> contour, const ConvexHull& hull) {
  const double inner = std::abs(signed_area(contour));
  return std::max(0.0, hull.area - inner) / hull.perimeter;
}

double alr(const DualCircuit& circuit) {
  const auto pts = circuit.points();
  return alr(pts, convex_hull(circuit));
}

namespace {

double depth_in_hull(Point v, std::span<const Point> h) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = h.size();
  for (std::size_t j = 0; j < m; ++j) best = std::min(best, signed_line_distance(v, h[j], h[(j + 1) % m]));
  return std::max(0.0, best);
}

}  // namespace

double mlr(std::span<const Point> contour, const ConvexHull& hull) {
  const auto& h = hull.extreme_points;
  const std::size_t m = h.size();
  Point c{0, 0};
  for (const auto& p : h) c = c + p;
  c = (1.0 / static_cast<double>(m)) * c;

  // Each vertex gets the line of the hull edge facing it as seen from c; the
  // distance to that line bounds its depth from above.
  std::vector<std::pair<double, std::size_t>> fan(m);
  for (std::size_t j = 0; j < m; ++j) fan[j] = {std::atan2(h[j].y - c.y, h[j].x - c.x), j};
  std::sort(fan.begin(), fan.end());
  std::vector<std::pair<double, std::size_t>> bound;
  bound.reserve(contour.size());
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const Point v = contour[i];
    const double a = std::atan2(v.y - c.y, v.x - c.x);
    auto it = std::upper_bound(fan.begin(), fan.end(), std::make_pair(a, m));
    const std::size_t j = (it == fan.begin() ? fan.back() : *(it - 1)).second;
    bound.push_back({signed_line_distance(v, h[j], h[(j + 1) % m]), i});
  }
  std::sort(bound.begin(), bound.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  double best = 0.0;
  for (const auto& [ub, i] : bound) {
    if (ub <= best) break;
    best = std::max(best, depth_in_hull(contour[i], h));
  }
  return best;
}

double mlr(const DualCircuit& circuit) {
  const auto pts = circuit.points();
  return mlr(pts, convex_hull(circuit));
}

namespace {

std::pair<std::size_t, std::size_t> extremes_along(std::span<const Point> pts, Point t) {
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (dot(t, pts[i]) < dot(t, pts[lo])) lo = i;
    if (dot(t, pts[i]) > dot(t, pts[hi])) hi = i;
  }
  return {lo, hi};
}

}  // namespace

// tau(a - b) = max over polar vertices t of (t, a - b), so the best pair for
// a fixed t is its argmin/argmax.
double tau_diameter(std::span<const Point> points, const TauNorm& tau) {
  double best = 0.0;
  if (points.empty()) return best;
  for (const Point& t : tau.unit_ball_polar()) {
    const auto [lo, hi] = extremes_along(points, t);
    best = std::max(best, tau(points[hi] - points[lo]));
  }
  return best;
}

std::vector<std::size_t> tau_diameter_ends(std::span<const Point> points, const TauNorm& tau, double dt,
                                           double tol) {
  std::vector<char> hit(points.size(), 0);
  const double slack = tol + 1e-9 * std::max(dt, 1.0);
  for (const Point& t : tau.unit_ball_polar()) {
    const auto [lo, hi] = extremes_along(points, t);
    const double top = dot(t, points[hi]), bottom = dot(t, points[lo]);
    for (std::size_t c = 0; c < points.size(); ++c) {
      const double v = dot(t, points[c]);
      if (top - v >= dt - slack && tau(points[hi] - points[c]) >= dt - tol) hit[c] = 1;
      if (v - bottom >= dt - slack && tau(points[c] - points[lo]) >= dt - tol) hit[c] = 1;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < points.size(); ++c)
    if (hit[c]) out.push_back(c);
  return out;
}

Diameters diameters(const ConvexHull& hull, const TauNorm& tau) {
  Diameters d;
  const auto& h = hull.extreme_points;
  d.diam = hull_diameter(h);
  d.diam_tau = tau_diameter(h, tau);
  return d;
}

Diameters diameters(const DualCircuit& circuit, const TauNorm& tau) {
  return diameters(convex_hull(circuit), tau);
}

namespace {

std::size_t argmax_dot(std::span<const Point> poly, Point u) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < poly.size(); ++i)
    if (dot(poly[i], u) > dot(poly[best], u)) best = i;
  return best;
}

void push_normals(std::span<const Point> poly, std::vector<double>& angles) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = poly[(i + 1) % n] - poly[i];
    angles.push_back(std::atan2(-e.x, e.y));
  }
}

Point centroid(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  double a = 0, cx = 0, cy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = poly[i], q = poly[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (3.0 * a), cy / (3.0 * a)};
}

}  // namespace

double convex_hausdorff(std::span<const Point> a, std::span<const Point> b) {
  // Between consecutive edge normals of either polygon both support points
  // are fixed vertices, so h_a - h_b is (va - vb) . u there.
  std::vector<double> ang;
  push_normals(a, ang);
  push_normals(b, ang);
  std::sort(ang.begin(), ang.end());
  const std::size_t k = ang.size();
  double best = 0.0;
  auto unit = [](double t) { return Point{std::cos(t), std::sin(t)}; };
  for (std::size_t i = 0; i < k; ++i) {
    const double t0 = ang[i];
    const double t1 = (i + 1 < k) ? ang[i + 1] : ang[0] + 2 * std::numbers::pi;
    const Point mid = unit(0.5 * (t0 + t1));
    const Point w = a[argmax_dot(a, mid)] - b[argmax_dot(b, mid)];
    best = std::max({best, std::abs(dot(w, unit(t0))), std::abs(dot(w, unit(t1)))});
    if (t1 > t0 && norm(w) > 0) {
      for (double base : {std::atan2(w.y, w.x), std::atan2(-w.y, -w.x)}) {
        for (double t : {base - 2 * std::numbers::pi, base, base + 2 * std::numbers::pi})
          if (t > t0 && t < t1) best = std::max(best, norm(w));
      }
    }
  }
  return best;
}

double hausdorff_to_wulff(const ConvexHull& hull, const WulffShape& wulff, double l) {
  if (!(l > 0)) throw std::invalid_argument("hausdorff_to_wulff: l must be positive");
  Polygon shape;
  for (const auto& p : wulff.unit_shape) shape.push_back(l * p);
  const auto& h = hull.extreme_points;
  Polygon moved(shape.size());
  auto f = [&](Point x) {
    for (std::size_t i = 0; i < shape.size(); ++i) moved[i] = shape[i] + x;
    return convex_hausdorff(h, moved);
  };

  // Nelder-Mead on the translation.
  const Point x0 = centroid(h) - centroid(shape);
  const double step = std::max(1.0, 0.1 * l);
  std::array<Point, 3> s{x0, x0 + Point{step, 0}, x0 + Point{0, step}};
  std::array<double, 3> v{f(s[0]), f(s[1]), f(s[2])};
  for (int iter = 0; iter < 500; ++iter) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int i, int j) { return v[i] < v[j]; });
    const int lo = o[0], mid = o[1], hi = o[2];
    const double size = std::max(norm(s[mid] - s[lo]), norm(s[hi] - s[lo]));
    if (size < 1e-3) break;
    const Point c = 0.5 * (s[lo] + s[mid]);
    const Point xr = c + (c - s[hi]);
    const double fr = f(xr);
    if (fr < v[lo]) {
      const Point xe = c + 2.0 * (c - s[hi]);
      const double fe = f(xe);
      if (fe < fr) { s[hi] = xe; v[hi] = fe; } else { s[hi] = xr; v[hi] = fr; }
    } else if (fr < v[mid]) {
      s[hi] = xr; v[hi] = fr;
    } else {
      const Point xc = (fr < v[hi]) ? c + 0.5 * (xr - c) : c + 0.5 * (s[hi] - c);
      const double fc = f(xc);
      if (fc < std::min(fr, v[hi])) {
        s[hi] = xc; v[hi] = fc;
      } else {
        for (int i : {mid, hi}) {
          s[i] = s[lo] + 0.5 * (s[i] - s[lo]);
          v[i] = f(s[i]);
        }
      }
    }
  }
  return std::min({v[0], v[1], v[2]});
}

RoughnessReport roughness(const DualCircuit& circuit, const TauNorm& tau) {
  const auto pts = circuit.points();
  const auto hull = convex_hull(std::span<const Point>(pts));
  RoughnessReport r;
  r.alr = alr(pts, hull);
  r.mlr = mlr(pts, hull);
  const auto d = diameters(hull, tau);
  r.diam = d.diam;
  r.diam_tau = d.diam_tau;
  return r;
}

}  // namespace droplab
