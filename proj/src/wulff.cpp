#include "droplab/wulff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace droplab {

WulffShape build_wulff(const TauNorm& tau) {
  WulffShape w;
  w.tau = tau;
  w.polygon = tau.unit_ball_polar();
  w.area = signed_area(w.polygon);
  const double k = 1.0 / std::sqrt(w.area);
  for (const auto& p : w.polygon) w.unit_shape.push_back(k * p);
  w.wulff_constant = wulff_functional(w.unit_shape, tau);
  return w;
}

Point polar_point(const WulffShape& wulff, Point x) {
  if (x.x == 0.0 && x.y == 0.0) throw std::invalid_argument("polar_point: zero direction");
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& v : wulff.polygon) top = std::max(top, dot(v, x));
  // A direction normal to an edge is maximized along the whole edge; take its midpoint.
  const double tol = 1e-12 * (std::abs(top) + 1.0);
  Point sum{0, 0};
  int count = 0;
  for (const auto& v : wulff.polygon)
    if (dot(v, x) >= top - tol) {
      sum = sum + v;
      ++count;
    }
  return (1.0 / count) * sum;
}

double wulff_functional(std::span<const Point> polygon, const TauNorm& tau) {
  const std::size_t n = polygon.size();
  if (n < 3) throw std::invalid_argument("wulff_functional: not a closed polygon");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += tau(polygon[(i + 1) % n] - polygon[i]);
  return s;
}

}  // namespace droplab
