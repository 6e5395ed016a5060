#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "droplab/geometry.hpp"
#include "droplab/lattice.hpp"

namespace droplab {

/// Connected components of the open dual subgraph.
struct DualClusterLabeling {
  int half_width = 0;
  /// Row-major over dual bases [-L-1, L]^2; -1 for sites with no open dual bond.
  std::vector<int> label;
  std::vector<std::size_t> cluster_sizes;

  int label_of(DualSite d) const;
  std::size_t cluster_count() const { return cluster_sizes.size(); }
};

/// Union-find labelling. Labels are dense, assigned in row-major order of
/// first appearance.
DualClusterLabeling label_dual_clusters(const BondConfig& config);

/// Closed dual path stored as its vertex cycle x_0 .. x_{n-1}; the bond
/// x_{n-1} -> x_0 closes it. Vertices may repeat at touch points.
struct DualCircuit {
  std::vector<DualSite> vertices;

  std::size_t size() const { return vertices.size(); }
  std::vector<DualBond> bonds() const;
  /// Vertex positions in the plane (base + (1/2, 1/2)).
  Polygon points() const;
};

struct DropletRecord {
  DualCircuit circuit;
  double interior_area = 0.0;
  double diameter = 0.0;
  double l_eff = 0.0;
  bool boundary_contaminated = false;
};

/// Reusable scratch space for exterior_circuit; keep one per thread.
struct ExteriorWorkspace {
  int half_width = -1;
  std::uint32_t epoch = 0;
  std::vector<std::uint32_t> stamp;     // per primal site
  std::vector<std::uint8_t> state;      // classification valid when stamp == epoch
  std::vector<std::uint32_t> in_cluster;
  std::vector<std::vector<int>> buckets;
  std::vector<int> visited;

  void prepare(int L);
};

/// Exterior open dual circuit around the primal site `around`, or nullopt
/// when no open dual circuit surrounds it. Vertices are counter-clockwise.
std::optional<DropletRecord> exterior_circuit(const BondConfig& config, SiteCoord around);
std::optional<DropletRecord> exterior_circuit(const BondConfig& config, SiteCoord around,
                                              ExteriorWorkspace& ws);
/// Same result as on sample_config(L, p, seed), touching only the bonds it needs.
std::optional<DropletRecord> exterior_circuit(const LazyBondField& field, SiteCoord around,
                                              ExteriorWorkspace& ws);

/// Exhaustive search over all open dual circuits surrounding `around`.
/// Exponential; refuses boxes with more than 64 dual sites (L > 3).
std::vector<DualCircuit> enumerate_all_circuits(const BondConfig& config, SiteCoord around);

/// Lebesgue measure of Int(circuit) by the shoelace formula.
/// Throws std::invalid_argument for circuits with fewer than 4 bonds.
double interior_area(const DualCircuit& circuit);

/// Primal sites (unit cells) in Int(circuit), by flood fill of faces from outside.
std::vector<SiteCoord> enclosed_sites(const DualCircuit& circuit);

/// Orientation-independent canonical bond list (sorted).
std::vector<DualBond> sorted_bonds(const DualCircuit& circuit);

}  // namespace droplab
