#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "droplab/circuit.hpp"
#include "droplab/geometry.hpp"
#include "droplab/rng.hpp"
#include "droplab/roughness.hpp"
#include "droplab/tau.hpp"
#include "droplab/wulff.hpp"
#include "oracles.hpp"

using namespace droplab;

namespace {

Polygon rotate(const Polygon& p, double a) {
  Polygon r;
  for (const auto& v : p) r.push_back({std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y});
  return r;
}

Polygon random_convex(SplitMix64& g, int n) {
  Polygon pts;
  for (int i = 0; i < n; ++i) pts.push_back({g.normal() * 5, g.normal() * 3});
  return convex_hull(pts).extreme_points;
}

DualCircuit rectangle(int x0, int y0, int w, int h) {
  DualCircuit c;
  for (int x = 0; x < w; ++x) c.vertices.push_back({x0 + x, y0});
  for (int y = 0; y < h; ++y) c.vertices.push_back({x0 + w, y0 + y});
  for (int x = w; x > 0; --x) c.vertices.push_back({x0 + x, y0 + h});
  for (int y = h; y > 0; --y) c.vertices.push_back({x0, y0 + y});
  return c;
}

std::vector<DropletRecord> some_droplets(std::size_t n) {
  std::vector<DropletRecord> out;
  ExteriorWorkspace ws;
  for (std::uint64_t s = 0; out.size() < n; ++s) {
    const LazyBondField f(64, 0.55, s);
    auto r = exterior_circuit(f, {0, 0}, ws);
    if (r && r->circuit.size() >= 8) out.push_back(std::move(*r));
  }
  return out;
}

}  // namespace

TEST(Geometry, ShoelaceAndPerimeter) {
  const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_DOUBLE_EQ(signed_area(sq), 4.0);
  EXPECT_DOUBLE_EQ(perimeter(sq), 8.0);
  const Polygon cw(sq.rbegin(), sq.rend());
  EXPECT_DOUBLE_EQ(signed_area(cw), -4.0);
  Polygon closed = sq;
  closed.push_back(sq.front());
  EXPECT_EQ(open_cycle(closed), sq);
}

TEST(Geometry, HullDropsInteriorAndCollinearPoints) {
  const Polygon pts{{0, 0}, {1, 0}, {2, 0}, {2, 2}, {1, 1}, {0, 2}, {0, 1}};
  const auto h = convex_hull(pts);
  EXPECT_EQ(h.extreme_points.size(), 4u);
  EXPECT_DOUBLE_EQ(h.area, 4.0);
  EXPECT_DOUBLE_EQ(h.perimeter, 8.0);
  EXPECT_GT(signed_area(h.extreme_points), 0.0);
  const Polygon line{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_THROW(convex_hull(line), std::invalid_argument);
}

TEST(Geometry, HullMatchesGiftWrapping) {
  SplitMix64 g(5);
  for (int t = 0; t < 200; ++t) {
    Polygon pts;
    for (int i = 0; i < 40; ++i) pts.push_back({g.normal(), g.normal()});
    const auto a = convex_hull(pts).extreme_points;
    const auto b = oracle::jarvis_hull(pts);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_NEAR(signed_area(a), signed_area(b), 1e-12);
  }
}

TEST(Geometry, DistancesAndMembership) {
  const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_DOUBLE_EQ(point_segment_distance({1, 1}, {0, 0}, {2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 0}, {0, 0}, {2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(signed_line_distance({1, 1}, {0, 0}, {2, 0}), 1.0);
  EXPECT_TRUE(in_convex(sq, {1, 1}));
  EXPECT_TRUE(in_convex(sq, {2, 1}));
  EXPECT_FALSE(in_convex(sq, {2.1, 1}));
  EXPECT_DOUBLE_EQ(distance_to_convex(sq, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(distance_to_convex(sq, {5, 6}), 5.0);
  EXPECT_DOUBLE_EQ(hull_diameter(sq), std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(support(sq, {1, 1}), 4.0);
}

TEST(Geometry, ClipAndHalfPlanes) {
  const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const Polygon shifted{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_NEAR(signed_area(clip_to_convex(shifted, sq)), 1.0, 1e-12);
  const std::vector<Point> normals{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::vector<double> off{1, 1, 1, 1};
  const auto box = halfplane_intersection(normals, off, 10);
  EXPECT_NEAR(signed_area(box), 4.0, 1e-12);
  const std::vector<double> empty{1, 1, -2, 1};
  EXPECT_TRUE(halfplane_intersection(normals, empty, 10).empty());
}

TEST(Geometry, HullDiameterMatchesAllPairs) {
  SplitMix64 g(17);
  for (int t = 0; t < 100; ++t) {
    const auto h = random_convex(g, 30);
    double best = 0;
    for (const auto& a : h)
      for (const auto& b : h) best = std::max(best, norm(a - b));
    EXPECT_NEAR(hull_diameter(h), best, 1e-12);
  }
}

TEST(Roughness, RectanglesAreExactlySmooth) {
  SplitMix64 g(3);
  for (int t = 0; t < 50; ++t) {
    const auto c = rectangle(static_cast<int>(g.below(10)) - 5, static_cast<int>(g.below(10)) - 5,
                             1 + static_cast<int>(g.below(20)), 1 + static_cast<int>(g.below(20)));
    EXPECT_EQ(mlr(c), 0.0);
    EXPECT_EQ(alr(c), 0.0);
  }
}

TEST(Roughness, MlrMatchesBruteForce) {
  for (const auto& d : some_droplets(300)) {
    const auto pts = d.circuit.points();
    EXPECT_NEAR(mlr(d.circuit), oracle::brute_mlr(pts), 1e-9);
  }
}

TEST(Roughness, AlrIsHullDefectOverPerimeter) {
  for (const auto& d : some_droplets(200)) {
    const auto pts = d.circuit.points();
    const auto h = oracle::jarvis_hull(pts);
    const double want = (signed_area(h) - d.interior_area) / perimeter(h);
    EXPECT_NEAR(alr(d.circuit), want, 1e-9);
    // |Co \ Int| <= MLR |dCo|
    EXPECT_LE(alr(d.circuit), mlr(d.circuit) + 1e-12);
  }
}

TEST(Roughness, ScalesWithDilationAndIgnoresRotation) {
  for (const auto& d : some_droplets(50)) {
    const Polygon pts = d.circuit.points();
    const auto h = convex_hull(pts);
    const double m = mlr(pts, h), a = alr(pts, h);
    for (double ang : {0.3, 1.1, 2.5}) {
      const auto r = rotate(pts, ang);
      const auto hr = convex_hull(r);
      EXPECT_NEAR(mlr(r, hr), m, 1e-9);
      EXPECT_NEAR(alr(r, hr), a, 1e-9);
    }
    Polygon big;
    for (const auto& v : pts) big.push_back(3.0 * v);
    const auto hb = convex_hull(big);
    EXPECT_NEAR(mlr(big, hb), 3.0 * m, 1e-9);
    EXPECT_NEAR(alr(big, hb), 3.0 * a, 1e-9);
  }
}

TEST(Roughness, TooFewVerticesThrow) {
  DualCircuit c;
  c.vertices = {{0, 0}, {1, 0}, {1, 1}};
  EXPECT_THROW(convex_hull(c), std::invalid_argument);
}

TEST(Roughness, ConvexHausdorffMatchesDenseSampling) {
  SplitMix64 g(23);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_convex(g, 12);
    auto b = random_convex(g, 12);
    const Point shift{g.normal(), g.normal()};
    for (auto& v : b) v = v + shift;
    const double exact = convex_hausdorff(a, b);
    const double sampled = oracle::sampled_hausdorff(a, b, 400);
    EXPECT_GE(exact + 1e-9, sampled);
    EXPECT_NEAR(exact, sampled, 0.05);
  }
  const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_NEAR(convex_hausdorff(sq, sq), 0.0, 1e-12);
}

TEST(Roughness, DiametersUnderL1Norm) {
  const auto c = rectangle(0, 0, 6, 6);
  const auto d = diameters(c, TauNorm::l1(1.0));
  EXPECT_NEAR(d.diam, 6.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(d.diam_tau, 12.0, 1e-12);
}

TEST(Roughness, ScaledWulffShapeSitsOnItself) {
  const auto w = build_wulff(TauNorm::l1(1.0));
  const double l = 20.0;
  Polygon shape;
  for (const auto& v : w.unit_shape) shape.push_back(l * v + Point{3.0, -2.0});
  const auto h = convex_hull(shape);
  EXPECT_LT(hausdorff_to_wulff(h, w, l), 1e-2);
  EXPECT_GT(hausdorff_to_wulff(h, w, 2 * l), 1.0);
}

TEST(Roughness, TauDiameterMatchesAllPairs) {
  const auto tau = load_tau_file(std::string(DROPLAB_SOURCE_DIR) + "/data/tau_p055.json");
  SplitMix64 g(41);
  auto check = [&](const Polygon& h) {
    double dt = 0;
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = i + 1; j < h.size(); ++j) dt = std::max(dt, tau(h[j] - h[i]));
    EXPECT_NEAR(tau_diameter(h, tau), dt, 1e-12 * dt);
    const double tol = 1e-12 * dt;
    std::vector<std::size_t> ends;
    for (std::size_t c = 0; c < h.size(); ++c) {
      bool hit = false;
      for (std::size_t j = 0; j < h.size(); ++j) hit = hit || tau(h[j] - h[c]) >= dt - tol || tau(h[c] - h[j]) >= dt - tol;
      if (hit) ends.push_back(c);
    }
    EXPECT_EQ(tau_diameter_ends(h, tau, dt, tol), ends);
  };
  for (int t = 0; t < 200; ++t) check(random_convex(g, 25));
  for (const auto& d : some_droplets(300)) check(convex_hull(d.circuit).extreme_points);
  check(convex_hull(rectangle(0, 0, 8, 8)).extreme_points);
}
