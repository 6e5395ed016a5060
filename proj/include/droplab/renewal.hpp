#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "droplab/geometry.hpp"
#include "droplab/lattice.hpp"
#include "droplab/rng.hpp"
#include "droplab/wulff.hpp"

namespace droplab {

/// Slab between the lines orthogonal to t through x and y. The direction is
/// kept as an integer vector so that (t, z) is exact: proj(z) = t.x z.x + t.y z.y
/// on dual base coordinates.
struct SlabSpec {
  SiteCoord t{1, 0};
  DualSite x{0, 0};
  DualSite y{1, 0};

  SlabSpec() = default;
  /// Throws std::invalid_argument unless t != 0 and proj(x) < proj(y).
  SlabSpec(SiteCoord t, DualSite x, DualSite y);

  long proj(DualSite z) const { return static_cast<long>(t.x) * z.x + static_cast<long>(t.y) * z.y; }
  bool contains(DualSite z) const { return proj(z) >= proj(x) && proj(z) <= proj(y); }
  /// Coordinate axis unit vector with maximal (e, t); e1 wins ties.
  SiteCoord e() const;
  long step() const { const auto v = e(); return proj(DualSite{v.x, v.y}); }
  /// |y - x|.
  double length() const;
};

/// Oriented reference line. f(z) is the signed distance to the line,
/// positive on the side of `normal`.
struct ReferenceLine {
  Point point;
  Point normal;  ///< unit

  /// Line through a and b with the normal on the right of a -> b (the
  /// outward side for a counter-clockwise polygon).
  static ReferenceLine through(Point a, Point b);
  double f(Point z) const { return dot(normal, z - point); }
};

inline Point position(DualSite d) { return {d.cx(), d.cy()}; }

struct RenewalRecord {
  SlabSpec slab;
  bool connected_htilde = false;
  std::vector<DualSite> cluster;      ///< sorted; empty when not connected
  std::vector<DualSite> regen_points; ///< ordered by proj
  std::vector<double> increments;
  ReferenceLine reference_line;
};

/// Sites of the cluster of x among open dual bonds with both endpoints in the
/// slab, if it contains y. Throws std::out_of_range when x or y is not a dual
/// site of the box.
std::optional<std::vector<DualSite>> slab_cluster(const BondConfig& config, const SlabSpec& slab);
std::optional<std::vector<DualSite>> slab_cluster(const LazyBondField& field, const SlabSpec& slab);

bool h_tilde_connected(const BondConfig& config, const SlabSpec& slab);
bool h_connected(const BondConfig& config, const SlabSpec& slab);
bool f_connected(const BondConfig& config, const SlabSpec& slab);

/// z strictly between the end lines with cluster /\ S_{z-e, z+e} = {z-e, z, z+e}.
/// Throws std::domain_error when x and y are not connected in the slab.
std::vector<DualSite> regeneration_points(const BondConfig& config, const SlabSpec& slab);
std::vector<DualSite> regeneration_points(const std::vector<DualSite>& cluster, const SlabSpec& slab);

/// Delta(r_1) = f(r_1), Delta(r_k) = f(r_k) - f(r_{k-1}).
std::vector<double> increments(const std::vector<DualSite>& regen, const ReferenceLine& line);

/// Full record; reference line through x and y unless given.
RenewalRecord renewal_record(const BondConfig& config, const SlabSpec& slab,
                             std::optional<ReferenceLine> line = std::nullopt);
RenewalRecord renewal_record(const LazyBondField& field, const SlabSpec& slab,
                             std::optional<ReferenceLine> line = std::nullopt);

/// Greedy thinning: N = floor(delta |y - x|), R = floor(N / 8). The first pick
/// is the first point with proj >= proj(x + 4e), each next one the first with
/// proj >= proj(previous + 8e). nullopt when there are fewer than N points.
std::optional<std::vector<DualSite>> select_Q(const std::vector<DualSite>& regen, const SlabSpec& slab,
                                              double delta);

/// Swaps the pieces of the configuration between r_{k-1}, r_k and r_k, r_{k+1}
/// (k is 1-based, 2 <= k <= |regen| - 1), moving r_k to r_{k-1} + r_{k+1} - r_k.
/// Piece [r_{k-1}, r_k] moves by r_{k+1} - r_k, piece [r_k, r_{k+1}] by
/// r_{k-1} - r_k, bonds crossing or lying on the middle line by
/// r_{k-1} + r_{k+1} - 2 r_k; bonds lying on the outer lines and everything
/// outside stays. Dual bonds outside the box count as closed.
/// Throws std::out_of_range for a bad k and std::domain_error when an open dual
/// bond would leave the box.
BondConfig exchange_adjacent(const BondConfig& config, const RenewalRecord& record, std::size_t k);

/// Copy of `config` in which the only open dual bonds are those of the slab
/// cluster of the record.
BondConfig restrict_to_cluster(const BondConfig& config, const RenewalRecord& record);

struct ExchangeAudit {
  bool involution = false;            ///< exchanging twice restores `config` bit for bit
  bool open_count_preserved = false;
  bool regen_count_preserved = false; ///< on the cluster-restricted configuration
  bool increments_swapped = false;    ///< Delta(r_k), Delta(r_{k+1}) trade places, the rest stay
  bool ok() const { return involution && open_count_preserved && regen_count_preserved && increments_swapped; }
};

/// One exchange at k checked by recomputation, on `config` embedded in a box
/// padded by the largest shift. Involution and open-bond count use the whole
/// configuration (the second exchange uses the record with r_k moved);
/// the regeneration points and increments are recomputed on the
/// cluster-restricted configuration.
ExchangeAudit audit_exchange(const BondConfig& config, const RenewalRecord& record, std::size_t k);

/// Lattice symmetry taking a vector into the wedge V (angle in [0, pi/4]).
struct WedgeMap {
  bool swap = false;
  int sx = 1;
  int sy = 1;
  static WedgeMap into_wedge(Point v);
  Point apply(Point v) const;
  Point invert(Point v) const;
};

struct TiChoice {
  Point w_from;
  Point w_to;
  WedgeMap symmetry;       ///< maps w_to - w_from into V
  Point t_tilde;           ///< polar point on dK1 /\ V
  Point t;                 ///< rational-slope point on dK1 /\ V
  int slope_num = 0;       ///< r
  int slope_den = 1;       ///< q = floor(1/lambda) + 1
  SiteCoord direction;     ///< (q, r) divided by their gcd
  double lambda = 0.0;
};

/// Throws std::invalid_argument for w_from == w_to or lambda <= 0, and
/// std::domain_error (with the nearest achievable distance) when no slope
/// r/q lands within lambda of the polar point.
TiChoice choose_t(Point w_from, Point w_to, const WulffShape& wulff, double lambda);

struct TubeStats {
  bool connected_in_tube = false;
  double max_abs_partial_sum = 0.0;  ///< max |S_k2 - S_k1| over prefix sums S_0 = 0, S_k = f(r_k)
  std::size_t regen_outside_tube = 0;
};

/// Tube = {z : |f(z)| <= d} around the reference line.
TubeStats tube_confinement_stats(const BondConfig& config, const RenewalRecord& record, double d);
TubeStats tube_confinement_stats(const LazyBondField& field, const RenewalRecord& record, double d);

/// Metropolis chain for Bernoulli(p) bonds conditioned on the event that the
/// slab endpoints are connected with at least `min_regen` regeneration points.
/// Updates only bonds whose dual endpoints both lie in the slab; the proposal
/// for a bond is a fresh Bernoulli(p) draw, rejected when it leaves the event.
/// Starts from a straight open dual segment from x to y (so the slab must be
/// axis aligned or the caller supplies a starting configuration).
class ConditionedSlabSampler {
 public:
  ConditionedSlabSampler(int half_width, double p, const SlabSpec& slab, std::size_t min_regen,
                         std::uint64_t seed);
  ConditionedSlabSampler(BondConfig start, const SlabSpec& slab, std::size_t min_regen, std::uint64_t seed);

  /// One systematic pass over the updatable bonds.
  void sweep();
  const BondConfig& config() const { return config_; }
  const RenewalRecord& record() const { return record_; }
  std::uint64_t proposals() const { return proposals_; }
  std::uint64_t rejections() const { return rejections_; }

 private:
  bool in_event(const RenewalRecord& r) const;

  BondConfig config_;
  SlabSpec slab_;
  std::size_t min_regen_;
  SplitMix64 rng_;
  std::vector<Bond> bonds_;
  RenewalRecord record_;
  std::uint64_t proposals_ = 0;
  std::uint64_t rejections_ = 0;
};

}  // namespace droplab
