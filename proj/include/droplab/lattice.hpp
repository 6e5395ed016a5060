#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace droplab {

struct SiteCoord {
  int x = 0;
  int y = 0;

  friend constexpr SiteCoord operator+(SiteCoord a, SiteCoord b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr SiteCoord operator-(SiteCoord a, SiteCoord b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr auto operator<=>(const SiteCoord&, const SiteCoord&) = default;
};

/// Dual site base + (1/2, 1/2), stored by its integer base.
struct DualSite {
  int x = 0;
  int y = 0;

  constexpr double cx() const { return x + 0.5; }
  constexpr double cy() const { return y + 0.5; }

  friend constexpr DualSite operator+(DualSite a, SiteCoord d) { return {a.x + d.x, a.y + d.y}; }
  friend constexpr DualSite operator-(DualSite a, SiteCoord d) { return {a.x - d.x, a.y - d.y}; }
  friend constexpr SiteCoord operator-(DualSite a, DualSite b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr auto operator<=>(const DualSite&, const DualSite&) = default;
};

/// Nearest-neighbour primal bond, lexicographically smaller endpoint first.
struct Bond {
  SiteCoord a;
  SiteCoord b;

  bool horizontal() const { return a.y == b.y; }
  friend constexpr auto operator<=>(const Bond&, const Bond&) = default;
};

/// Nearest-neighbour dual bond, lexicographically smaller endpoint first.
struct DualBond {
  DualSite a;
  DualSite b;

  bool horizontal() const { return a.y == b.y; }
  friend constexpr auto operator<=>(const DualBond&, const DualBond&) = default;
};

/// Throws std::invalid_argument unless |a - b| = 1.
Bond make_bond(SiteCoord a, SiteCoord b);
DualBond make_dual_bond(DualSite a, DualSite b);

/// Perpendicular bisector of a primal bond.
/// <(x,y),(x+1,y)> maps to <(x,y-1)*,(x,y)*>; <(x,y),(x,y+1)> to <(x-1,y)*,(x,y)*>.
DualBond dual_bond(const Bond& b);

/// Inverse of dual_bond.
Bond primal_partner(const DualBond& db);

/// Bernoulli bond configuration on the box [-L, L]^2.
///
/// Horizontal bonds <(x,y),(x+1,y)> and vertical bonds <(x,y),(x,y+1)> are
/// stored in two bit planes. Bonds that would leave the box do not exist;
/// in the dual picture there is no dual bond across them. Dual sites that can
/// carry a dual bond have base coordinates in [-L-1, L]^2.
class BondConfig {
 public:
  /// Every in-box bond set to `open`.
  BondConfig(int half_width, double p, std::uint64_t seed, bool open = false);

  static BondConfig uniform(int half_width, bool open) { return BondConfig(half_width, 0.75, 0, open); }

  int half_width() const { return L_; }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }

  bool contains(const Bond& b) const;
  bool contains(SiteCoord s) const { return s.x >= -L_ && s.x <= L_ && s.y >= -L_ && s.y <= L_; }

  /// Throws std::out_of_range for bonds not in the box.
  bool is_open(const Bond& b) const;
  void set_open(const Bond& b, bool open);

  // Unchecked plane accessors; (x, y) is the lower/left endpoint.
  bool open_h(int x, int y) const { return test(h_, hindex(x, y)); }
  bool open_v(int x, int y) const { return test(v_, vindex(x, y)); }
  bool has_h(int x, int y) const { return x >= -L_ && x < L_ && y >= -L_ && y <= L_; }
  bool has_v(int x, int y) const { return x >= -L_ && x <= L_ && y >= -L_ && y < L_; }

  /// Dual bond (d, d + (1,0)) is open. False when its primal partner is outside the box.
  bool dual_open_east(DualSite d) const { return has_v(d.x + 1, d.y) && !open_v(d.x + 1, d.y); }
  /// Dual bond (d, d + (0,1)) is open. False when its primal partner is outside the box.
  bool dual_open_north(DualSite d) const { return has_h(d.x, d.y + 1) && !open_h(d.x, d.y + 1); }
  bool dual_bond_in_box(const DualBond& db) const { return contains(primal_partner(db)); }

  std::size_t bond_count() const;
  std::size_t open_count() const;
  int dual_min() const { return -L_ - 1; }
  int dual_max() const { return L_; }

  const std::vector<std::uint64_t>& horizontal_plane() const { return h_; }
  const std::vector<std::uint64_t>& vertical_plane() const { return v_; }

  friend bool operator==(const BondConfig& a, const BondConfig& b) {
    return a.L_ == b.L_ && a.h_ == b.h_ && a.v_ == b.v_;
  }

 private:
  friend BondConfig sample_config(int, double, std::uint64_t);
  friend BondConfig read_snapshot(std::istream&);

  std::size_t hindex(int x, int y) const {
    return static_cast<std::size_t>(y + L_) * (2 * L_) + static_cast<std::size_t>(x + L_);
  }
  std::size_t vindex(int x, int y) const {
    return static_cast<std::size_t>(y + L_) * (2 * L_ + 1) + static_cast<std::size_t>(x + L_);
  }
  static bool test(const std::vector<std::uint64_t>& plane, std::size_t i) {
    return (plane[i >> 6] >> (i & 63)) & 1U;
  }
  static void assign(std::vector<std::uint64_t>& plane, std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v) plane[i >> 6] |= m; else plane[i >> 6] &= ~m;
  }

  int L_;
  double p_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> h_;
  std::vector<std::uint64_t> v_;
};

/// Position of an in-box bond in the sampling order: sites row-major
/// (y ascending, then x ascending), horizontal bond before vertical bond at
/// each site, absent bonds skipped.
std::uint64_t bond_enumeration_index(int half_width, const Bond& b);

/// Bond with enumeration index k is open iff the k-th word of the SplitMix64
/// stream seeded with `seed`, read as a 53-bit uniform, is below p.
/// Throws DomainError unless 1/2 < p < 1 and L >= 1.
BondConfig sample_config(int half_width, double p, std::uint64_t seed);

/// Dual bond state. Throws std::out_of_range if the primal partner is not in the box.
bool is_dual_open(const BondConfig& config, const DualBond& db);

/// Copy of `config` in the box [-half_width, half_width]^2. Added bonds are
/// open, so their dual bonds are closed. Throws std::invalid_argument when the
/// new box is smaller.
BondConfig embed(const BondConfig& config, int half_width);

/// Bond states of sample_config(L, p, seed), evaluated on demand.
class LazyBondField {
 public:
  LazyBondField(int half_width, double p, std::uint64_t seed);

  int half_width() const { return L_; }
  bool has_h(int x, int y) const { return x >= -L_ && x < L_ && y >= -L_ && y <= L_; }
  bool has_v(int x, int y) const { return x >= -L_ && x <= L_ && y >= -L_ && y < L_; }
  bool open_h(int x, int y) const;
  bool open_v(int x, int y) const;
  bool dual_open_east(DualSite d) const { return has_v(d.x + 1, d.y) && !open_v(d.x + 1, d.y); }
  bool dual_open_north(DualSite d) const { return has_h(d.x, d.y + 1) && !open_h(d.x, d.y + 1); }

 private:
  int L_;
  std::uint64_t seed_;
  std::uint64_t threshold_;
};

/// Binary snapshot: "DLAB", u16 version, u32 L, f64 p, u64 seed, then the
/// horizontal and vertical bit planes (LSB-first bytes), all little-endian.
void write_snapshot(std::ostream& out, const BondConfig& config);
BondConfig read_snapshot(std::istream& in);

}  // namespace droplab
