#include <gtest/gtest.h>

#include <deque>
#include <map>

#include "droplab/circuit.hpp"
#include "droplab/lattice.hpp"
#include "oracles.hpp"

using namespace droplab;

namespace {

void close_ring_around(BondConfig& c, SiteCoord s) {
  const DualSite a{s.x - 1, s.y - 1}, b{s.x, s.y - 1}, d{s.x, s.y}, e{s.x - 1, s.y};
  for (const auto& db : {make_dual_bond(a, b), make_dual_bond(b, d), make_dual_bond(e, d), make_dual_bond(a, e)})
    c.set_open(primal_partner(db), false);
}

}  // namespace

TEST(Circuit, MatchesExhaustiveEnumerationOnSmallBoxes) {
  for (double p : {0.55, 0.8}) {
    int with = 0;
    for (std::uint64_t s = 0; s < 1500; ++s) {
      const BondConfig c = sample_config(2, p, s);
      std::string why;
      ASSERT_TRUE(oracle::exterior_matches_enumeration(c, {0, 0}, &why)) << "p=" << p << " seed=" << s << ": " << why;
      with += exterior_circuit(c, {0, 0}).has_value();
    }
    EXPECT_GT(with, 0);
    EXPECT_LT(with, 1500);
  }
}

TEST(Circuit, MatchesEnumerationAwayFromOrigin) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const BondConfig c = sample_config(2, 0.52, s);
    ASSERT_TRUE(oracle::exterior_matches_enumeration(c, {1, -1})) << s;
  }
}

TEST(Circuit, AllPrimalOpenHasNoCircuit) {
  const auto c = BondConfig::uniform(4, true);
  EXPECT_FALSE(exterior_circuit(c, {0, 0}).has_value());
}

TEST(Circuit, SinglePlaquette) {
  auto c = BondConfig::uniform(4, true);
  close_ring_around(c, {0, 0});
  const auto r = exterior_circuit(c, {0, 0});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->circuit.size(), 4u);
  EXPECT_DOUBLE_EQ(r->interior_area, 1.0);
  EXPECT_DOUBLE_EQ(r->l_eff, 1.0);
  EXPECT_DOUBLE_EQ(r->diameter, std::sqrt(2.0));
  EXPECT_FALSE(r->boundary_contaminated);
  EXPECT_GT(signed_area(r->circuit.points()), 0.0);
  EXPECT_FALSE(exterior_circuit(c, {2, 0}).has_value());
}

TEST(Circuit, TwoNestedRingsPickTheOuterOne) {
  auto c = BondConfig::uniform(6, true);
  close_ring_around(c, {0, 0});
  // 3x3 ring of closed primal bonds around the origin block.
  for (int k = -1; k <= 1; ++k) {
    c.set_open(make_bond({k, 1}, {k, 2}), false);
    c.set_open(make_bond({k, -2}, {k, -1}), false);
    c.set_open(make_bond({1, k}, {2, k}), false);
    c.set_open(make_bond({-2, k}, {-1, k}), false);
  }
  const auto r = exterior_circuit(c, {0, 0});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->circuit.size(), 12u);
  EXPECT_DOUBLE_EQ(r->interior_area, 9.0);
  EXPECT_EQ(enclosed_sites(r->circuit).size(), 9u);
}

TEST(Circuit, FullyDualOpenBoxIsContaminated) {
  const int L = 3;
  const auto c = BondConfig::uniform(L, false);
  const auto r = exterior_circuit(c, {0, 0});
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->boundary_contaminated);
  EXPECT_DOUBLE_EQ(r->interior_area, static_cast<double>(enclosed_sites(r->circuit).size()));
}

TEST(Circuit, LazyFieldGivesTheSameDroplet) {
  ExteriorWorkspace ws;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int L = 24;
    const BondConfig c = sample_config(L, 0.55, s);
    const LazyBondField f(L, 0.55, s);
    const auto a = exterior_circuit(c, {0, 0});
    const auto b = exterior_circuit(f, {0, 0}, ws);
    ASSERT_EQ(a.has_value(), b.has_value()) << s;
    if (!a) continue;
    EXPECT_EQ(a->circuit.vertices, b->circuit.vertices);
    EXPECT_EQ(a->interior_area, b->interior_area);
    EXPECT_EQ(a->boundary_contaminated, b->boundary_contaminated);
  }
}

TEST(Circuit, CircuitBondsAreOpenAndClosed) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const BondConfig c = sample_config(20, 0.56, s);
    const auto r = exterior_circuit(c, {0, 0});
    if (!r) continue;
    const auto& v = r->circuit.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto d = v[(i + 1) % v.size()] - v[i];
      ASSERT_EQ(std::abs(d.x) + std::abs(d.y), 1);
    }
    for (const auto& db : r->circuit.bonds()) ASSERT_TRUE(is_dual_open(c, db));
    EXPECT_NEAR(std::abs(signed_area(r->circuit.points())), r->interior_area, 1e-9);
  }
}

TEST(Circuit, InteriorAreaRejectsShortCircuits) {
  DualCircuit c;
  c.vertices = {{0, 0}, {1, 0}};
  EXPECT_THROW(interior_area(c), std::invalid_argument);
}

TEST(Circuit, EnumerationRefusesLargeBoxes) {
  EXPECT_ANY_THROW(enumerate_all_circuits(sample_config(4, 0.6, 1), {0, 0}));
}

TEST(Circuit, UnionFindLabelsMatchBreadthFirstSearch) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int L = 10;
    const BondConfig c = sample_config(L, 0.5 + 0.02 * (s % 10) + 0.01, s);
    const auto lab = label_dual_clusters(c);
    std::map<DualSite, int> comp;
    std::vector<std::size_t> sizes;
    for (int y = -L - 1; y <= L; ++y)
      for (int x = -L - 1; x <= L; ++x) {
        const DualSite d0{x, y};
        if (comp.count(d0)) continue;
        std::vector<DualSite> seen{d0};
        std::deque<DualSite> q{d0};
        comp[d0] = static_cast<int>(sizes.size());
        while (!q.empty()) {
          const auto z = q.front();
          q.pop_front();
          for (const SiteCoord e : {SiteCoord{1, 0}, SiteCoord{-1, 0}, SiteCoord{0, 1}, SiteCoord{0, -1}}) {
            const DualSite w = z + e;
            if (w.x < -L - 1 || w.x > L || w.y < -L - 1 || w.y > L || comp.count(w)) continue;
            const auto db = make_dual_bond(z, w);
            if (!c.contains(primal_partner(db)) || !is_dual_open(c, db)) continue;
            comp[w] = comp[d0];
            seen.push_back(w);
            q.push_back(w);
          }
        }
        sizes.push_back(seen.size());
      }
    std::map<int, int> to_bfs;
    std::size_t clusters = 0;
    for (const auto& [d, k] : comp) {
      const int l = lab.label_of(d);
      if (sizes[k] == 1) {
        EXPECT_EQ(l, -1);
        continue;
      }
      ASSERT_GE(l, 0);
      auto [it, fresh] = to_bfs.emplace(l, k);
      EXPECT_EQ(it->second, k);
      if (fresh) {
        ++clusters;
        EXPECT_EQ(lab.cluster_sizes[l], sizes[k]);
      }
    }
    EXPECT_EQ(lab.cluster_count(), clusters);
  }
}
