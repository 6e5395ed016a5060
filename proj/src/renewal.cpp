#include "droplab/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace droplab {

SlabSpec::SlabSpec(SiteCoord t_, DualSite x_, DualSite y_) : t(t_), x(x_), y(y_) {
  if (t.x == 0 && t.y == 0) throw std::invalid_argument("slab direction must be nonzero");
  if (!(proj(x) < proj(y))) throw std::invalid_argument("slab needs (t, x) < (t, y)");
}

SiteCoord SlabSpec::e() const {
  const SiteCoord c[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  SiteCoord best = c[0];
  for (const auto& v : c)
    if (proj(DualSite{v.x, v.y}) > proj(DualSite{best.x, best.y})) best = v;
  return best;
}

double SlabSpec::length() const { return std::hypot(y.x - x.x, y.y - x.y); }

ReferenceLine ReferenceLine::through(Point a, Point b) {
  const Point d = b - a;
  const double n = norm(d);
  if (n == 0.0) throw std::invalid_argument("reference line needs two distinct points");
  return {a, Point{d.y / n, -d.x / n}};
}

namespace {

template <typename Field>
class DualGrid {
 public:
  explicit DualGrid(const Field& f) : f_(f), L_(f.half_width()), g_(2 * L_ + 2) {}

  bool inside(DualSite d) const { return d.x >= -L_ - 1 && d.x <= L_ && d.y >= -L_ - 1 && d.y <= L_; }
  std::size_t id(DualSite d) const {
    return static_cast<std::size_t>(d.y + L_ + 1) * g_ + static_cast<std::size_t>(d.x + L_ + 1);
  }
  std::size_t size() const { return static_cast<std::size_t>(g_) * g_; }

  // Open dual neighbours of d.
  template <typename Visit>
  void neighbours(DualSite d, Visit&& visit) const {
    if (f_.dual_open_east(d)) visit(d + SiteCoord{1, 0});
    if (f_.dual_open_east(d - SiteCoord{1, 0})) visit(d - SiteCoord{1, 0});
    if (f_.dual_open_north(d)) visit(d + SiteCoord{0, 1});
    if (f_.dual_open_north(d - SiteCoord{0, 1})) visit(d - SiteCoord{0, 1});
  }

  // Component of `from` over open dual bonds whose endpoints both satisfy `keep`.
  template <typename Keep>
  std::vector<DualSite> component(DualSite from, Keep&& keep) const {
    std::vector<char> seen(size(), 0);
    std::vector<DualSite> out{from};
    seen[id(from)] = 1;
    for (std::size_t k = 0; k < out.size(); ++k) {
      neighbours(out[k], [&](DualSite v) {
        if (!keep(v) || seen[id(v)]) return;
        seen[id(v)] = 1;
        out.push_back(v);
      });
    }
    return out;
  }

 private:
  const Field& f_;
  int L_;
  int g_;
};

template <typename Field>
std::optional<std::vector<DualSite>> cluster_impl(const Field& f, const SlabSpec& slab) {
  DualGrid<Field> grid(f);
  if (!grid.inside(slab.x) || !grid.inside(slab.y)) throw std::out_of_range("slab endpoints outside the box");
  auto comp = grid.component(slab.x, [&](DualSite v) { return slab.contains(v); });
  std::sort(comp.begin(), comp.end());
  if (!std::binary_search(comp.begin(), comp.end(), slab.y)) return std::nullopt;
  return comp;
}

bool has(const std::vector<DualSite>& sorted, DualSite d) {
  return std::binary_search(sorted.begin(), sorted.end(), d);
}

// cluster /\ {lo <= proj <= hi} equals exactly the given sites.
bool window_is(const std::vector<DualSite>& cluster, const SlabSpec& slab, long lo, long hi,
               std::initializer_list<DualSite> sites) {
  std::size_t count = 0;
  for (const auto& z : cluster) {
    const long p = slab.proj(z);
    if (p >= lo && p <= hi) ++count;
  }
  if (count != sites.size()) return false;
  for (const auto& s : sites)
    if (!has(cluster, s)) return false;
  return true;
}

bool h_from_cluster(const std::vector<DualSite>& c, const SlabSpec& slab) {
  const SiteCoord e = slab.e();
  const long s = slab.step();
  return window_is(c, slab, slab.proj(slab.x), slab.proj(slab.x) + s, {slab.x, slab.x + e}) &&
         window_is(c, slab, slab.proj(slab.y) - s, slab.proj(slab.y), {slab.y - e, slab.y});
}

template <typename Field>
RenewalRecord record_impl(const Field& f, const SlabSpec& slab, std::optional<ReferenceLine> line) {
  RenewalRecord rec;
  rec.slab = slab;
  rec.reference_line = line ? *line : ReferenceLine::through(position(slab.x), position(slab.y));
  auto c = cluster_impl(f, slab);
  if (!c) return rec;
  rec.connected_htilde = true;
  rec.cluster = std::move(*c);
  rec.regen_points = regeneration_points(rec.cluster, slab);
  rec.increments = increments(rec.regen_points, rec.reference_line);
  return rec;
}

template <typename Field>
TubeStats tube_impl(const Field& f, const RenewalRecord& rec, double d) {
  TubeStats st;
  const auto& line = rec.reference_line;
  if (!rec.regen_points.empty()) {
    // Prefix sums of the increments are the heights f(r_k), plus 0 before r_1.
    double lo = 0.0, hi = 0.0;
    for (const auto& r : rec.regen_points) {
      const double v = line.f(position(r));
      if (std::abs(v) > d) ++st.regen_outside_tube;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      st.max_abs_partial_sum = std::max(st.max_abs_partial_sum, hi - lo);
    }
  }
  const auto& slab = rec.slab;
  auto in_tube = [&](DualSite v) { return slab.contains(v) && std::abs(line.f(position(v))) <= d; };
  if (in_tube(slab.x) && in_tube(slab.y)) {
    DualGrid<Field> grid(f);
    const auto comp = grid.component(slab.x, in_tube);
    st.connected_in_tube = std::find(comp.begin(), comp.end(), slab.y) != comp.end();
  }
  return st;
}

}  // namespace

std::optional<std::vector<DualSite>> slab_cluster(const BondConfig& config, const SlabSpec& slab) {
  return cluster_impl(config, slab);
}

std::optional<std::vector<DualSite>> slab_cluster(const LazyBondField& field, const SlabSpec& slab) {
  return cluster_impl(field, slab);
}

bool h_tilde_connected(const BondConfig& config, const SlabSpec& slab) {
  return slab_cluster(config, slab).has_value();
}

bool h_connected(const BondConfig& config, const SlabSpec& slab) {
  const auto c = slab_cluster(config, slab);
  return c && h_from_cluster(*c, slab);
}

bool f_connected(const BondConfig& config, const SlabSpec& slab) {
  const auto c = slab_cluster(config, slab);
  if (!c || !h_from_cluster(*c, slab)) return false;
  const long px = slab.proj(slab.x), py = slab.proj(slab.y);
  for (const auto& z : *c) {
    const long pz = slab.proj(z);
    if (pz <= px || pz >= py) continue;
    if (h_connected(config, SlabSpec(slab.t, slab.x, z)) && h_connected(config, SlabSpec(slab.t, z, slab.y)))
      return false;
  }
  return true;
}

std::vector<DualSite> regeneration_points(const std::vector<DualSite>& cluster, const SlabSpec& slab) {
  const SiteCoord e = slab.e();
  const long s = slab.step();
  std::vector<long> proj;
  proj.reserve(cluster.size());
  for (const auto& z : cluster) proj.push_back(slab.proj(z));
  std::sort(proj.begin(), proj.end());
  auto count_in = [&](long lo, long hi) {
    return std::upper_bound(proj.begin(), proj.end(), hi) - std::lower_bound(proj.begin(), proj.end(), lo);
  };
  const long px = slab.proj(slab.x), py = slab.proj(slab.y);
  std::vector<DualSite> out;
  for (const auto& z : cluster) {
    const long pz = slab.proj(z);
    if (pz <= px || pz >= py) continue;
    if (count_in(pz - s, pz + s) == 3 && has(cluster, z - e) && has(cluster, z + e)) out.push_back(z);
  }
  std::sort(out.begin(), out.end(), [&](DualSite a, DualSite b) { return slab.proj(a) < slab.proj(b); });
  return out;
}

std::vector<DualSite> regeneration_points(const BondConfig& config, const SlabSpec& slab) {
  const auto c = slab_cluster(config, slab);
  if (!c) throw std::domain_error("regeneration_points: endpoints not connected in the slab");
  return regeneration_points(*c, slab);
}

std::vector<double> increments(const std::vector<DualSite>& regen, const ReferenceLine& line) {
  std::vector<double> out;
  out.reserve(regen.size());
  double prev = 0.0;
  for (const auto& r : regen) {
    const double v = line.f(position(r));
    out.push_back(v - prev);
    prev = v;
  }
  return out;
}

RenewalRecord renewal_record(const BondConfig& config, const SlabSpec& slab, std::optional<ReferenceLine> line) {
  return record_impl(config, slab, line);
}

RenewalRecord renewal_record(const LazyBondField& field, const SlabSpec& slab, std::optional<ReferenceLine> line) {
  return record_impl(field, slab, line);
}

std::optional<std::vector<DualSite>> select_Q(const std::vector<DualSite>& regen, const SlabSpec& slab,
                                              double delta) {
  const auto N = static_cast<std::size_t>(std::floor(delta * slab.length()));
  if (regen.size() < N) return std::nullopt;
  const std::size_t R = N / 8;
  const long s = slab.step();
  std::vector<DualSite> q;
  long need = slab.proj(slab.x) + 4 * s;
  for (const auto& r : regen) {
    if (q.size() == R) break;
    if (slab.proj(r) >= need) {
      q.push_back(r);
      need = slab.proj(r) + 8 * s;
    }
  }
  return q;
}

namespace {

bool dual_is_open(const BondConfig& c, const DualBond& db) {
  const Bond b = primal_partner(db);
  return c.contains(b) && !c.is_open(b);
}

template <typename Visit>
void for_each_box_dual_bond(const BondConfig& c, Visit&& visit) {
  const int L = c.half_width();
  for (int y = -L; y <= L; ++y)
    for (int x = -L; x <= L; ++x) {
      if (c.has_h(x, y)) visit(dual_bond(Bond{{x, y}, {x + 1, y}}));
      if (c.has_v(x, y)) visit(dual_bond(Bond{{x, y}, {x, y + 1}}));
    }
}

}  // namespace

BondConfig exchange_adjacent(const BondConfig& config, const RenewalRecord& record, std::size_t k) {
  const auto& rp = record.regen_points;
  if (k < 2 || k + 1 > rp.size()) throw std::out_of_range("exchange_adjacent: k out of range");
  const auto& slab = record.slab;
  const DualSite r0 = rp[k - 2], r1 = rp[k - 1], r2 = rp[k];
  const long a = slab.proj(r0), m = slab.proj(r1), b = slab.proj(r2);
  const SiteCoord shift_a = r2 - r1;
  const SiteCoord shift_b = r0 - r1;
  const SiteCoord shift_m = (r0 - r1) + (r2 - r1);

  // Slot map on dual bonds; nullopt for bonds that stay.
  auto target = [&](const DualBond& db) -> std::optional<SiteCoord> {
    const long p1 = std::min(slab.proj(db.a), slab.proj(db.b));
    const long p2 = std::max(slab.proj(db.a), slab.proj(db.b));
    if (p1 < a || p2 > b) return std::nullopt;
    if (p1 == p2 && (p1 == a || p1 == b)) return std::nullopt;
    if (p1 == p2 && p1 == m) return shift_m;
    if (p2 <= m) return shift_a;
    if (p1 >= m) return shift_b;
    return shift_m;
  };

  BondConfig out = config;
  std::vector<DualBond> moved_open;
  for_each_box_dual_bond(config, [&](const DualBond& db) {
    const auto sh = target(db);
    if (!sh) return;
    out.set_open(primal_partner(db), true);  // dual closed unless something lands here
    if (dual_is_open(config, db)) moved_open.push_back(db);
  });
  for (const auto& db : moved_open) {
    const SiteCoord sh = *target(db);
    const DualBond to = make_dual_bond(db.a + sh, db.b + sh);
    const Bond pb = primal_partner(to);
    if (!out.contains(pb)) throw std::domain_error("exchange_adjacent: open dual bond would leave the box");
    out.set_open(pb, false);
  }
  return out;
}

BondConfig restrict_to_cluster(const BondConfig& config, const RenewalRecord& record) {
  BondConfig out = config;
  const auto& c = record.cluster;
  for_each_box_dual_bond(config, [&](const DualBond& db) {
    const bool keep = dual_is_open(config, db) && has(c, db.a) && has(c, db.b) &&
                      record.slab.contains(db.a) && record.slab.contains(db.b);
    out.set_open(primal_partner(db), !keep);
  });
  return out;
}

ExchangeAudit audit_exchange(const BondConfig& original, const RenewalRecord& record, std::size_t k) {
  ExchangeAudit a;
  const auto& rp = record.regen_points;
  if (k < 2 || k + 1 > rp.size()) throw std::out_of_range("audit_exchange: k out of range");
  const SiteCoord sm = (rp[k - 2] - rp[k - 1]) + (rp[k] - rp[k - 1]);
  int pad = std::max(std::abs(sm.x), std::abs(sm.y));
  for (const SiteCoord v : {rp[k] - rp[k - 1], rp[k - 2] - rp[k - 1]})
    pad = std::max({pad, std::abs(v.x), std::abs(v.y)});
  const BondConfig config = embed(original, original.half_width() + pad + 1);
  const BondConfig once = exchange_adjacent(config, record, k);
  RenewalRecord moved = record;
  moved.regen_points[k - 1] = rp[k - 2] + (rp[k] - rp[k - 1]);
  a.involution = exchange_adjacent(once, moved, k) == config;
  a.open_count_preserved = once.open_count() == config.open_count();

  const BondConfig restricted = restrict_to_cluster(config, record);
  const RenewalRecord after =
      renewal_record(exchange_adjacent(restricted, record, k), record.slab, record.reference_line);
  a.regen_count_preserved = after.connected_htilde && after.regen_points.size() == rp.size();
  if (!a.regen_count_preserved) return a;
  std::vector<double> expected = record.increments;
  std::swap(expected[k - 1], expected[k]);
  a.increments_swapped = after.regen_points[k - 1] == moved.regen_points[k - 1];
  for (std::size_t i = 0; i < expected.size(); ++i)
    a.increments_swapped = a.increments_swapped && std::abs(after.increments[i] - expected[i]) <= 1e-9;
  return a;
}

WedgeMap WedgeMap::into_wedge(Point v) {
  WedgeMap g;
  g.sx = v.x < 0 ? -1 : 1;
  g.sy = v.y < 0 ? -1 : 1;
  g.swap = std::abs(v.y) > std::abs(v.x);
  return g;
}

Point WedgeMap::apply(Point v) const {
  const Point r{sx * v.x, sy * v.y};
  return swap ? Point{r.y, r.x} : r;
}

Point WedgeMap::invert(Point v) const {
  const Point r = swap ? Point{v.y, v.x} : v;
  return {sx * r.x, sy * r.y};
}

namespace {

// Point of the boundary of a convex polygon (containing 0) on the ray through u.
Point radial_point(const Polygon& poly, Point u) {
  double gauge = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = poly[(i + 1) % n] - poly[i];
    const Point nv{e.y, -e.x};
    const double c = dot(nv, poly[i]);
    gauge = std::max(gauge, dot(nv, u) / c);
  }
  return (1.0 / gauge) * u;
}

}  // namespace

TiChoice choose_t(Point w_from, Point w_to, const WulffShape& wulff, double lambda) {
  if (w_from == w_to) throw std::invalid_argument("choose_t: endpoints coincide");
  if (!(lambda > 0.0)) throw std::invalid_argument("choose_t: lambda must be positive");
  TiChoice c;
  c.w_from = w_from;
  c.w_to = w_to;
  c.lambda = lambda;
  c.symmetry = WedgeMap::into_wedge(w_to - w_from);
  const Point v = c.symmetry.apply(w_to - w_from);
  c.t_tilde = (1.0 / std::sqrt(wulff.area)) * polar_point(wulff, v);
  const int q = static_cast<int>(std::floor(1.0 / lambda)) + 1;
  c.slope_den = q;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= q; ++r) {
    const Point t = radial_point(wulff.unit_shape, Point{static_cast<double>(q), static_cast<double>(r)});
    const double dist = norm(t - c.t_tilde);
    if (dist < best) {
      best = dist;
      c.t = t;
      c.slope_num = r;
    }
  }
  if (best > lambda)
    throw std::domain_error("choose_t: no slope r/" + std::to_string(q) + " within lambda; nearest is " +
                            std::to_string(best));
  const int g = std::gcd(q, c.slope_num);
  c.direction = {q / g, c.slope_num / g};
  return c;
}

TubeStats tube_confinement_stats(const BondConfig& config, const RenewalRecord& record, double d) {
  return tube_impl(config, record, d);
}

TubeStats tube_confinement_stats(const LazyBondField& field, const RenewalRecord& record, double d) {
  return tube_impl(field, record, d);
}

}  // namespace droplab

namespace droplab {

namespace {

BondConfig straight_segment(int L, double p, const SlabSpec& slab) {
  const DualSite x = slab.x, y = slab.y;
  if (x.x != y.x && x.y != y.y)
    throw std::invalid_argument("conditioned sampler: straight start needs an axis-aligned segment");
  BondConfig c(L, p, 0, true);
  const SiteCoord step = x.x == y.x ? SiteCoord{0, y.y > x.y ? 1 : -1} : SiteCoord{y.x > x.x ? 1 : -1, 0};
  for (DualSite d = x; d != y; d = d + step) {
    const Bond b = primal_partner(make_dual_bond(d, d + step));
    if (!c.contains(b)) throw std::out_of_range("conditioned sampler: segment leaves the box");
    c.set_open(b, false);
  }
  return c;
}

}  // namespace

ConditionedSlabSampler::ConditionedSlabSampler(int L, double p, const SlabSpec& slab, std::size_t min_regen,
                                               std::uint64_t seed)
    : ConditionedSlabSampler(straight_segment(L, p, slab), slab, min_regen, seed) {}

ConditionedSlabSampler::ConditionedSlabSampler(BondConfig start, const SlabSpec& slab, std::size_t min_regen,
                                               std::uint64_t seed)
    : config_(std::move(start)), slab_(slab), min_regen_(min_regen), rng_(seed) {
  const double p = config_.p();
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("conditioned sampler: p must lie in (0, 1)");
  for_each_box_dual_bond(config_, [&](const DualBond& db) {
    if (slab_.contains(db.a) && slab_.contains(db.b)) bonds_.push_back(primal_partner(db));
  });
  record_ = renewal_record(config_, slab_);
  if (!in_event(record_)) throw std::invalid_argument("conditioned sampler: start is outside the event");
}

bool ConditionedSlabSampler::in_event(const RenewalRecord& r) const {
  return r.connected_htilde && r.regen_points.size() >= min_regen_;
}

void ConditionedSlabSampler::sweep() {
  const double p = config_.p();
  for (const Bond& b : bonds_) {
    const bool open = rng_.uniform() < p;
    if (open == config_.is_open(b)) continue;
    ++proposals_;
    const DualBond db = dual_bond(b);
    // Bonds away from the cluster cannot change it.
    if (!has(record_.cluster, db.a) && !has(record_.cluster, db.b)) {
      config_.set_open(b, open);
      continue;
    }
    if (open && !(has(record_.cluster, db.a) && has(record_.cluster, db.b))) {
      // Closing a dual bond that hangs off the cluster changes nothing either.
      config_.set_open(b, open);
      continue;
    }
    config_.set_open(b, open);
    auto next = renewal_record(config_, slab_);
    if (in_event(next)) {
      record_ = std::move(next);
    } else {
      config_.set_open(b, !open);
      ++rejections_;
    }
  }
}

}  // namespace droplab
