#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "droplab/circuit.hpp"
#include "droplab/errors.hpp"
#include "droplab/rng.hpp"
#include "droplab/roughness.hpp"
#include "droplab/skeleton.hpp"
#include "droplab/stats.hpp"
#include "oracles.hpp"

using namespace droplab;

namespace {

const std::string kData = std::string(DROPLAB_SOURCE_DIR) + "/data/";

DualCircuit rectangle(int x0, int y0, int w, int h) {
  DualCircuit c;
  for (int x = 0; x < w; ++x) c.vertices.push_back({x0 + x, y0});
  for (int y = 0; y < h; ++y) c.vertices.push_back({x0 + w, y0 + y});
  for (int x = w; x > 0; --x) c.vertices.push_back({x0 + x, y0 + h});
  for (int y = h; y > 0; --y) c.vertices.push_back({x0, y0 + y});
  return c;
}

// Rectangle with a rectangular notch cut down from the middle of the top side.
DualCircuit notched(int w, int h, int notch_w, int depth) {
  DualCircuit c;
  const int a = (w - notch_w) / 2, b = a + notch_w;
  for (int x = 0; x < w; ++x) c.vertices.push_back({x, 0});
  for (int y = 0; y < h; ++y) c.vertices.push_back({w, y});
  for (int x = w; x > b; --x) c.vertices.push_back({x, h});
  for (int y = h; y > h - depth; --y) c.vertices.push_back({b, y});
  for (int x = b; x > a; --x) c.vertices.push_back({x, h - depth});
  for (int y = h - depth; y < h; ++y) c.vertices.push_back({a, y});
  for (int x = a; x > 0; --x) c.vertices.push_back({x, h});
  for (int y = h; y > 0; --y) c.vertices.push_back({0, y});
  return c;
}

std::vector<DropletRecord> droplets(std::size_t n, double min_l) {
  std::vector<DropletRecord> out;
  ExteriorWorkspace ws;
  for (std::uint64_t s = 0; out.size() < n; ++s) {
    const LazyBondField f(96, 0.55, 1000 + s);
    auto r = exterior_circuit(f, {0, 0}, ws);
    if (r && !r->boundary_contaminated && r->l_eff >= min_l) out.push_back(std::move(*r));
  }
  return out;
}

}  // namespace

TEST(Scale, FormulaExample) {
  const double l = std::exp(2.0);
  const auto sp = scale_params(l, 0.5, 1.0);
  EXPECT_NEAR(sp.s, std::sqrt(0.5 * std::sqrt(std::numbers::pi) / 2) * std::exp(4.0 / 3) * std::pow(2.0, -1.0 / 3), 1e-12);
  EXPECT_NEAR(sp.d, std::exp(2.0 / 3) * std::pow(2.0, -2.0 / 3), 1e-12);
}

TEST(Scale, LogCorrectionExponent) {
  std::vector<double> x, y;
  for (double l = 10; l < 1e6; l *= 3) {
    x.push_back(std::log(std::log(l)));
    y.push_back(std::log(scale_params(l, 0.1).s / std::pow(l, 2.0 / 3)));
  }
  EXPECT_NEAR(least_squares(x, y).slope, -1.0 / 3, 1e-9);
}

TEST(Scale, TubeWidthBelowScale) {
  for (double K7 : {1.0, 2.0, 3.0})
    for (double theta = 0.05; theta <= 0.5 + 1e-9; theta += 0.05)
      for (double l = 10; l <= 1e6; l *= 1.1) {
        const auto sp = scale_params(l, theta, K7);
        ASSERT_LT(sp.d, sp.s) << "K7=" << K7 << " theta=" << theta << " l=" << l;
      }
}

TEST(Scale, DomainErrors) {
  EXPECT_THROW(scale_params(2.0, 0.1), DomainError);
  EXPECT_THROW(scale_params(10.0, 0.0), DomainError);
  EXPECT_THROW(scale_params(10.0, 1.0), DomainError);
}

TEST(Skeleton, SquareKeepsItsCorners) {
  const auto c = rectangle(0, 0, 20, 20);
  const auto sk = hull_skeleton(c, 12.0, TauNorm::l1(1.0));
  ASSERT_EQ(sk.points.size(), 4u);
  const auto h = convex_hull(c);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(sk.points[i], h.extreme_points[sk.hull_index[i]]);
  EXPECT_THROW(hull_skeleton(c, 21.0, TauNorm::l1(1.0)), DomainError);
}

TEST(Skeleton, CircleSpacingTracksScale) {
  const double R = 1000;
  Polygon circle;
  for (int k = 0; k < 4000; ++k)
    circle.push_back({R * std::cos(2 * std::numbers::pi * k / 4000), R * std::sin(2 * std::numbers::pi * k / 4000)});
  const auto hull = convex_hull(circle);
  const auto tau = TauNorm::isotropic(1.0, 12);
  for (double s : {20.0, 40.0, 80.0}) {
    const auto sk = hull_skeleton(hull, s, tau);
    const double ratio = sk.points.size() * s / (2 * std::numbers::pi * R);
    EXPECT_NEAR(ratio, 1.0, 0.05) << s;
  }
}

TEST(Skeleton, PointsAreExtremeAndInHullOrder) {
  const auto tau = load_tau_file(kData + "tau_p055.json").normalized();
  for (const auto& d : droplets(100, 4.0)) {
    const auto h = convex_hull(d.circuit);
    const double s = scale_params(std::max(d.l_eff, 3.0), 0.1).s;
    if (diameters(h, tau).diam_tau < 2 * s) continue;
    const auto sk = hull_skeleton(h, s, tau);
    ASSERT_GE(sk.points.size(), 2u);
    std::size_t descents = 0;
    for (std::size_t i = 0; i < sk.points.size(); ++i) {
      EXPECT_EQ(sk.points[i], h.extreme_points[sk.hull_index[i]]);
      if (i && sk.hull_index[i] <= sk.hull_index[i - 1]) ++descents;
    }
    EXPECT_LE(descents, 1u);
    // Every kept point after the first is at least s from its predecessor.
    for (std::size_t i = 1; i < sk.points.size(); ++i) EXPECT_GE(tau(sk.points[i] - sk.points[i - 1]), s - 1e-9);
  }
}

TEST(Skeleton, CommittedConstantsHoldOnASample) {
  const auto tau = load_tau_file(kData + "tau_p055.json").normalized();
  int audited = 0;
  for (const auto& d : droplets(200, 4.0)) {
    const double s = scale_params(d.l_eff, 0.1).s;
    const auto h = convex_hull(d.circuit);
    if (diameters(h, tau).diam_tau < 2 * s) continue;
    const auto sk = hull_skeleton(h, s, tau);
    const auto a = audit_skeleton(d.circuit, sk, tau);
    EXPECT_TRUE(a.holds(kSkeletonConstants)) << a.needed_K5() << " " << a.needed_K6() << " " << a.needed_K7() << " " << a.needed_K8();
    ++audited;
  }
  EXPECT_GT(audited, 100);
}

TEST(LongSides, ThresholdArithmetic) {
  const double s = 10, K5 = 2;
  const double thr = s * std::sqrt(std::numbers::pi) / (16 * K5);
  const double a = 2 * thr, b = 0.5 * thr;
  const Polygon big{{0, 0}, {a, 0}, {a, a}, {0, a}};
  EXPECT_EQ(long_sides(big, s, K5).size(), 4u);
  const Polygon small{{0, 0}, {b, 0}, {b, b}, {0, b}};
  EXPECT_TRUE(long_sides(small, s, K5).empty());
}

TEST(Annulus, SquareFrame) {
  const auto sk = hull_skeleton(rectangle(0, 0, 100, 100), 30.0, TauNorm::l1(1.0));
  const auto at = annulus_and_tubes(sk, 2.0);
  const Point c = 0.25 * (sk.points[0] + sk.points[1] + sk.points[2] + sk.points[3]);
  EXPECT_FALSE(at.contains(c));
  for (const auto& w : sk.points) EXPECT_TRUE(at.contains(w));
  EXPECT_TRUE(at.contains(sk.points[0] + Point{1.5, 50}));
  EXPECT_FALSE(at.contains(sk.points[0] + Point{2.5, 50}));
  EXPECT_THROW(annulus_and_tubes(sk, 0.0), std::invalid_argument);
}

TEST(Annulus, MembershipMatchesLiteralDefinition) {
  const auto tau = load_tau_file(kData + "tau_p055.json").normalized();
  const auto ds = droplets(20, 6.0);
  SplitMix64 g(4);
  for (const auto& dr : ds) {
    const auto h = convex_hull(dr.circuit);
    const double s = scale_params(dr.l_eff, 0.1).s;
    if (diameters(h, tau).diam_tau < 2 * s) continue;
    const auto sk = hull_skeleton(h, s, tau);
    if (sk.points.size() < 3) continue;
    const double d = 0.5 + 2 * (g() >> 11) * 0x1.0p-53;
    const auto at = annulus_and_tubes(sk, d);
    const double span = hull_diameter(h.extreme_points);
    for (int k = 0; k < 5000; ++k) {
      const Point z = sk.points[0] + Point{span * (g.normal() * 0.5), span * (g.normal() * 0.5)};
      const bool lit = oracle::annulus_member(sk.points, d, z);
      ASSERT_EQ(at.contains(z), lit);
      // Within d of the skeleton boundary is always inside; deep inside never is.
      const double bd = oracle::boundary_dist(z, sk.points);
      if (bd < d - 1e-9) EXPECT_TRUE(lit);
      if (in_convex(sk.points, z) && bd > d + 1e-9) EXPECT_FALSE(lit);
    }
  }
}

TEST(Confinement, SkeletonPolygonIsConfined) {
  const auto c = rectangle(-10, -7, 20, 14);
  const auto sk = hull_skeleton(c, 12.0, TauNorm::l1(1.0));
  EXPECT_TRUE(circuit_confined(c, annulus_and_tubes(sk, 0.01)));
}

TEST(Confinement, DeepNotchEscapes) {
  const auto c = notched(40, 30, 6, 8);
  const auto sk = hull_skeleton(c, 15.0, TauNorm::l1(1.0));
  EXPECT_EQ(sk.points.size(), 4u);
  EXPECT_FALSE(circuit_confined(c, annulus_and_tubes(sk, 3.0)));
  EXPECT_TRUE(circuit_confined(c, annulus_and_tubes(sk, 8.5)));
}

TEST(Confinement, SmallRoughnessImpliesConfinement) {
  const auto tau = load_tau_file(kData + "tau_p055.json").normalized();
  for (const auto& dr : droplets(100, 5.0)) {
    const auto h = convex_hull(dr.circuit);
    const double s = scale_params(dr.l_eff, 0.1).s;
    if (diameters(h, tau).diam_tau < 2 * s) continue;
    const auto sk = hull_skeleton(h, s, tau);
    if (sk.points.size() < 3) continue;
    const auto a = audit_skeleton(dr.circuit, sk, tau);
    const double d = std::max(mlr(dr.circuit), a.hull_distance) + 1e-6;
    EXPECT_TRUE(circuit_confined(dr.circuit, annulus_and_tubes(sk, d)));
  }
}
