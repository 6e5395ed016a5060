#include "droplab/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "droplab/errors.hpp"
#include "droplab/roughness.hpp"
#include "droplab/wulff.hpp"

namespace droplab {

ScaleParams scale_params(double l, double theta, double K7) {
  if (!(l > std::numbers::e)) throw DomainError("scale_params: l must exceed e");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("scale_params: theta must lie in (0, 1)");
  if (!(K7 > 0.0)) throw DomainError("scale_params: K7 must be positive");
  const double lg = std::log(l);
  ScaleParams p;
  p.s = std::sqrt(theta * std::sqrt(std::numbers::pi) / (2.0 * K7)) * std::pow(l, 2.0 / 3.0) *
        std::pow(lg, -1.0 / 3.0);
  p.d = 2.0 * theta * std::cbrt(l) * std::pow(lg, -2.0 / 3.0);
  return p;
}

std::vector<std::size_t> long_sides(const Polygon& pts, double s, double K5) {
  const double threshold = s * std::sqrt(std::numbers::pi) / (16.0 * K5);
  std::vector<std::size_t> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    if (norm(pts[(i + 1) % n] - pts[i]) >= threshold) out.push_back(i);
  return out;
}

HullSkeleton hull_skeleton(const ConvexHull& hull, double s, const TauNorm& tau, double K5) {
  if (!(s > 0.0)) throw DomainError("hull_skeleton: s must be positive");
  const auto& h = hull.extreme_points;
  const std::size_t m = h.size();

  const double dt = tau_diameter(h, tau);
  if (dt < 2.0 * s) throw DomainError("hull_skeleton: scale too coarse (tau-diameter below 2s)");

  std::size_t start = m;
  auto lex_less = [&](std::size_t a, std::size_t b) {
    return h[a].x < h[b].x || (h[a].x == h[b].x && h[a].y < h[b].y);
  };
  for (std::size_t c : tau_diameter_ends(h, tau, dt, 1e-12 * dt))
    if (start == m || lex_less(c, start)) start = c;

  std::vector<std::size_t> idx{start};
  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t c = (start + k) % m;
    if (tau(h[c] - h[idx.back()]) >= s) idx.push_back(c);
  }
  if (idx.size() < 3) {
    // Degenerate selection: add the extreme point farthest from the chord.
    const Point a = h[idx.front()], b = h[idx.back()];
    std::size_t far = m;
    double best = -1.0;
    for (std::size_t c = 0; c < m; ++c) {
      if (std::find(idx.begin(), idx.end(), c) != idx.end()) continue;
      const double dist = std::abs(signed_line_distance(h[c], a, b));
      if (dist > best) { best = dist; far = c; }
    }
    idx.push_back(far);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return (x + m - start) % m < (y + m - start) % m;
    });
  }

  HullSkeleton skel;
  skel.s = s;
  skel.K5_used = K5;
  skel.hull_index = idx;
  for (std::size_t i : idx) skel.points.push_back(h[i]);
  skel.long_sides = long_sides(skel.points, s, K5);
  return skel;
}

HullSkeleton hull_skeleton(const DualCircuit& circuit, double s, const TauNorm& tau, double K5) {
  return hull_skeleton(convex_hull(circuit), s, tau, K5);
}

bool SkeletonAudit::holds(const SkeletonConstants& k) const {
  return static_cast<double>(point_count) < k.K5 * diam / s && area_defect <= k.K6 * s * s &&
         hull_distance <= k.K7 * s * s / diam && functional_gap <= k.K8 * s * s / diam;
}

SkeletonAudit audit_skeleton(const DualCircuit& circuit, const HullSkeleton& skel, const TauNorm& tau) {
  const auto pts = circuit.points();
  const auto hull = convex_hull(std::span<const Point>(pts));
  SkeletonAudit a;
  a.point_count = skel.points.size();
  a.diam = hull_diameter(hull.extreme_points);
  a.s = skel.s;
  const double inner = std::abs(signed_area(pts));
  const double shared = signed_area(clip_to_convex(pts, skel.points));
  a.area_defect = std::max(0.0, inner - shared);
  for (const auto& v : hull.extreme_points)
    a.hull_distance = std::max(a.hull_distance, distance_to_convex(skel.points, v));
  a.functional_gap = wulff_functional(hull.extreme_points, tau) - wulff_functional(skel.points, tau);
  const std::size_t n = skel.points.size();
  for (std::size_t i : skel.long_sides) a.long_side_sum += norm(skel.points[(i + 1) % n] - skel.points[i]);
  return a;
}

bool AnnulusTube::contains(Point z) const {
  constexpr double eps = 1e-12;
  bool strictly_inner = true;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const double g = dot(normals[i], z) - offsets[i];
    if (g > d + eps) return false;
    if (!(g < -d - eps)) strictly_inner = false;
  }
  return !strictly_inner;
}

bool AnnulusTube::in_tube(std::size_t i, Point z) const {
  return std::abs(dot(normals[i], z) - offsets[i]) <= d + 1e-12;
}

AnnulusTube annulus_and_tubes(const HullSkeleton& skel, double d, std::vector<Point> tube_dirs) {
  if (!(d > 0.0)) throw std::invalid_argument("annulus_and_tubes: d must be positive");
  const auto& w = skel.points;
  const std::size_t n = w.size();
  if (n < 3) throw std::invalid_argument("annulus_and_tubes: skeleton needs at least 3 points");
  if (!tube_dirs.empty() && tube_dirs.size() != n)
    throw std::invalid_argument("annulus_and_tubes: one tube direction per side");

  AnnulusTube at;
  at.skeleton = skel;
  at.d = d;
  std::vector<Point> sides(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = w[(i + 1) % n] - w[i];
    sides[i] = (1.0 / norm(e)) * e;
    at.normals.push_back(Point{sides[i].y, -sides[i].x});
    at.offsets.push_back(dot(at.normals[i], w[i]));
  }
  if (tube_dirs.empty()) tube_dirs = sides;
  for (auto& t : tube_dirs) t = (1.0 / norm(t)) * t;
  at.tube_dirs = tube_dirs;

  std::vector<double> inner_off(n);
  double bound = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    inner_off[i] = at.offsets[i] - d;
    bound = std::max({bound, std::abs(w[i].x), std::abs(w[i].y)});
  }
  const auto inner = halfplane_intersection(at.normals, inner_off, 2.0 * bound + 2.0 * d);
  at.inner_empty = inner.size() < 3 || signed_area(inner) <= 0.0;

  // Largest slab along t_i whose cross sections of the tube stay inside every
  // other outer half plane; each constraint is linear in the slab coordinate.
  for (std::size_t i = 0; i < n; ++i) {
    const Point t = tube_dirs[i], u = sides[i], nv = at.normals[i];
    const double tu = dot(t, u);
    if (!(tu > 1e-9)) throw std::invalid_argument("annulus_and_tubes: tube direction parallel to the normal");
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Point nj = at.normals[j];
      const double kappa = dot(nj, u) / tu;
      for (double b : {-d, d}) {
        const double k0 = dot(nj, w[i]) + (-dot(t, w[i]) - b * dot(t, nv)) * dot(nj, u) / tu +
                          b * dot(nj, nv) - at.offsets[j] - d;
        if (kappa > 1e-12) hi = std::min(hi, -k0 / kappa);
        else if (kappa < -1e-12) lo = std::max(lo, -k0 / kappa);
        else if (k0 > 1e-12) { lo = 1.0; hi = 0.0; }
      }
    }
    const Point base = w[i] - d * nv;
    auto on_inner = [&](double proj) { return base + ((proj - dot(t, base)) / tu) * u; };
    at.slab_start.push_back(on_inner(lo));
    at.slab_end.push_back(on_inner(hi));
  }
  return at;
}

bool circuit_confined(const DualCircuit& circuit, const AnnulusTube& at) {
  for (const auto& v : circuit.vertices)
    if (!at.contains({v.cx(), v.cy()})) return false;
  return true;
}

}  // namespace droplab
