#include "droplab/circuit.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace droplab {

namespace {

constexpr std::array<SiteCoord, 4> kDir{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};  // E N W S

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

// --- dual clusters -------------------------------------------------------

int DualClusterLabeling::label_of(DualSite d) const {
  const int g = 2 * half_width + 2;
  const int i = d.x + half_width + 1;
  const int j = d.y + half_width + 1;
  if (i < 0 || j < 0 || i >= g || j >= g) return -1;
  return label[static_cast<std::size_t>(j) * g + i];
}

DualClusterLabeling label_dual_clusters(const BondConfig& config) {
  const int L = config.half_width();
  const int g = 2 * L + 2;
  const auto n = static_cast<std::size_t>(g) * g;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> touched(n, 0);
  auto id = [&](int x, int y) { return (y + L + 1) * g + (x + L + 1); };

  for (int y = -L - 1; y <= L; ++y) {
    for (int x = -L - 1; x <= L; ++x) {
      const DualSite d{x, y};
      if (x < L && config.dual_open_east(d)) {
        const int a = find_root(parent, id(x, y));
        const int b = find_root(parent, id(x + 1, y));
        parent[std::max(a, b)] = std::min(a, b);
        touched[id(x, y)] = touched[id(x + 1, y)] = 1;
      }
      if (y < L && config.dual_open_north(d)) {
        const int a = find_root(parent, id(x, y));
        const int b = find_root(parent, id(x, y + 1));
        parent[std::max(a, b)] = std::min(a, b);
        touched[id(x, y)] = touched[id(x, y + 1)] = 1;
      }
    }
  }

  DualClusterLabeling out;
  out.half_width = L;
  out.label.assign(n, -1);
  std::vector<int> root_label(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!touched[i]) continue;
    const int r = find_root(parent, static_cast<int>(i));
    if (root_label[r] < 0) {
      root_label[r] = static_cast<int>(out.cluster_sizes.size());
      out.cluster_sizes.push_back(0);
    }
    out.label[i] = root_label[r];
    ++out.cluster_sizes[root_label[r]];
  }
  return out;
}

// --- circuits ------------------------------------------------------------

std::vector<DualBond> DualCircuit::bonds() const {
  std::vector<DualBond> out;
  const std::size_t n = vertices.size();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_dual_bond(vertices[i], vertices[(i + 1) % n]));
  return out;
}

Polygon DualCircuit::points() const {
  Polygon out;
  out.reserve(vertices.size());
  for (const auto& v : vertices) out.push_back({v.cx(), v.cy()});
  return out;
}

double interior_area(const DualCircuit& circuit) {
  if (circuit.size() < 4) throw std::invalid_argument("interior_area: circuit has fewer than 4 bonds");
  const auto pts = circuit.points();
  return std::abs(signed_area(pts));
}

std::vector<DualBond> sorted_bonds(const DualCircuit& circuit) {
  auto b = circuit.bonds();
  std::sort(b.begin(), b.end());
  return b;
}

std::vector<SiteCoord> enclosed_sites(const DualCircuit& circuit) {
  if (circuit.size() < 4) return {};
  int x0 = circuit.vertices[0].x, x1 = x0, y0 = circuit.vertices[0].y, y1 = y0;
  for (const auto& v : circuit.vertices) {
    x0 = std::min(x0, v.x); x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y); y1 = std::max(y1, v.y);
  }
  // Primal sites x0 .. x1+1 cover the interior plus a one-site ring.
  const int w = x1 - x0 + 2;
  const int h = y1 - y0 + 2;
  std::set<DualBond> walls;
  for (const auto& b : circuit.bonds()) walls.insert(b);
  auto blocked = [&](SiteCoord s, SiteCoord t) { return walls.count(dual_bond(make_bond(s, t))) > 0; };

  std::vector<char> outside(static_cast<std::size_t>(w) * h, 0);
  auto at = [&](SiteCoord s) -> char& { return outside[(s.y - y0) * w + (s.x - x0)]; };
  std::vector<SiteCoord> stack;
  for (int x = x0; x <= x1 + 1; ++x) {
    stack.push_back({x, y0});
    stack.push_back({x, y1 + 1});
  }
  for (int y = y0; y <= y1 + 1; ++y) {
    stack.push_back({x0, y});
    stack.push_back({x1 + 1, y});
  }
  for (const auto& s : stack) at(s) = 1;
  while (!stack.empty()) {
    const SiteCoord s = stack.back();
    stack.pop_back();
    for (const auto& d : kDir) {
      const SiteCoord t = s + d;
      if (t.x < x0 || t.x > x1 + 1 || t.y < y0 || t.y > y1 + 1) continue;
      if (at(t) || blocked(s, t)) continue;
      at(t) = 1;
      stack.push_back(t);
    }
  }
  std::vector<SiteCoord> out;
  for (int y = y0; y <= y1 + 1; ++y)
    for (int x = x0; x <= x1 + 1; ++x)
      if (!at({x, y})) out.push_back({x, y});
  return out;
}

// --- exterior circuit ----------------------------------------------------

void ExteriorWorkspace::prepare(int L) {
  if (L == half_width) return;
  half_width = L;
  const auto n = static_cast<std::size_t>(2 * L + 1) * (2 * L + 1);
  stamp.assign(n, 0);
  state.assign(n, 0);
  in_cluster.assign(n, 0);
  buckets.assign(static_cast<std::size_t>(L) + 1, {});
  epoch = 0;
}

namespace {

constexpr std::uint8_t kUnknown = 0, kInO = 1, kNotO = 2, kVisiting = 3;

template <typename Field>
class ExteriorSearch {
 public:
  ExteriorSearch(const Field& f, ExteriorWorkspace& ws) : f_(f), ws_(ws), L_(f.half_width()) {
    ws_.prepare(L_);
    if (++ws_.epoch == 0) {
      std::fill(ws_.stamp.begin(), ws_.stamp.end(), 0);
      std::fill(ws_.in_cluster.begin(), ws_.in_cluster.end(), 0);
      ws_.epoch = 1;
    }
  }

  int index(int x, int y) const { return (y + L_) * (2 * L_ + 1) + (x + L_); }
  SiteCoord site(int i) const { return {i % (2 * L_ + 1) - L_, i / (2 * L_ + 1) - L_}; }
  int depth(SiteCoord s) const { return L_ - std::max(std::abs(s.x), std::abs(s.y)); }

  std::uint8_t state(int i) const { return ws_.stamp[i] == ws_.epoch ? ws_.state[i] : kUnknown; }
  void set_state(int i, std::uint8_t st) {
    ws_.stamp[i] = ws_.epoch;
    ws_.state[i] = st;
  }

  template <typename Visit>
  void for_open_neighbours(SiteCoord s, Visit&& visit) const {
    if (f_.has_h(s.x, s.y) && f_.open_h(s.x, s.y)) visit(SiteCoord{s.x + 1, s.y});
    if (f_.has_v(s.x, s.y) && f_.open_v(s.x, s.y)) visit(SiteCoord{s.x, s.y + 1});
    if (f_.has_h(s.x - 1, s.y) && f_.open_h(s.x - 1, s.y)) visit(SiteCoord{s.x - 1, s.y});
    if (f_.has_v(s.x, s.y - 1) && f_.open_v(s.x, s.y - 1)) visit(SiteCoord{s.x, s.y - 1});
  }

  // Whether s is joined to the box boundary by open bonds. Searches towards
  // the boundary first and stops at anything already known to be in O.
  bool in_o(SiteCoord s) {
    const int i0 = index(s.x, s.y);
    const auto st = state(i0);
    if (st == kInO) return true;
    if (st == kNotO) return false;
    if (depth(s) == 0) {
      set_state(i0, kInO);
      return true;
    }
    auto& buckets = ws_.buckets;
    auto& visited = ws_.visited;
    visited.clear();
    set_state(i0, kVisiting);
    visited.push_back(i0);
    int lo = depth(s);
    buckets[lo].push_back(i0);
    bool reached = false;
    while (!reached) {
      while (lo <= L_ && buckets[lo].empty()) ++lo;
      if (lo > L_) break;
      const int u = buckets[lo].back();
      buckets[lo].pop_back();
      for_open_neighbours(site(u), [&](SiteCoord v) {
        if (reached) return;
        const int j = index(v.x, v.y);
        const auto sv = state(j);
        if (sv == kInO || depth(v) == 0) {
          reached = true;
          return;
        }
        if (sv != kUnknown) return;
        set_state(j, kVisiting);
        visited.push_back(j);
        const int dv = depth(v);
        buckets[dv].push_back(j);
        lo = std::min(lo, dv);
      });
    }
    for (auto& b : buckets) b.clear();
    const std::uint8_t fin = reached ? kInO : kNotO;
    for (int j : visited) set_state(j, fin);
    return reached;
  }

  std::optional<DropletRecord> run(SiteCoord around) {
    if (std::abs(around.x) > L_ || std::abs(around.y) > L_)
      throw std::out_of_range("exterior_circuit: site outside the box");
    if (in_o(around)) return std::nullopt;

    // 8-connected component of non-O sites containing `around`.
    std::vector<SiteCoord> comp{around};
    ws_.in_cluster[index(around.x, around.y)] = ws_.epoch;
    int x0 = around.x, x1 = around.x, y0 = around.y, y1 = around.y;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const SiteCoord s = comp[k];
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const SiteCoord t{s.x + dx, s.y + dy};
          if (std::abs(t.x) >= L_ || std::abs(t.y) >= L_) continue;  // boundary sites are in O
          const int j = index(t.x, t.y);
          if (ws_.in_cluster[j] == ws_.epoch) continue;
          if (in_o(t)) continue;
          ws_.in_cluster[j] = ws_.epoch;
          comp.push_back(t);
          x0 = std::min(x0, t.x); x1 = std::max(x1, t.x);
          y0 = std::min(y0, t.y); y1 = std::max(y1, t.y);
        }
      }
    }

    // Fill holes: everything not reachable from the frame around the bounding box.
    const int gx0 = x0 - 1, gy0 = y0 - 1;
    const int w = x1 - x0 + 3, h = y1 - y0 + 3;
    std::vector<char> grid(static_cast<std::size_t>(w) * h, 0);  // 1 = component, 2 = exterior
    for (const auto& s : comp) grid[(s.y - gy0) * w + (s.x - gx0)] = 1;
    std::vector<int> stack;
    for (int i = 0; i < w; ++i) {
      stack.push_back(i);
      stack.push_back((h - 1) * w + i);
    }
    for (int j = 0; j < h; ++j) {
      stack.push_back(j * w);
      stack.push_back(j * w + w - 1);
    }
    for (int c : stack) grid[c] = 2;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int cx = c % w, cy = c / w;
      for (const auto& d : kDir) {
        const int nx = cx + d.x, ny = cy + d.y;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const int nc = ny * w + nx;
        if (grid[nc] != 0) continue;
        grid[nc] = 2;
        stack.push_back(nc);
      }
    }
    auto filled = [&](int x, int y) {
      const int lx = x - gx0, ly = y - gy0;
      if (lx < 0 || ly < 0 || lx >= w || ly >= h) return false;
      return grid[ly * w + lx] != 2;
    };
    long fill_count = 0;
    for (char c : grid) fill_count += (c != 2);

    // Boundary trace with the filled region on the left, preferring right turns.
    int sx = 0, sy = 0;
    bool found = false;
    for (int y = gy0; y < gy0 + h && !found; ++y)
      for (int x = gx0; x < gx0 + w && !found; ++x)
        if (filled(x, y)) { sx = x; sy = y; found = true; }
    auto can_go = [&](DualSite v, int d) {
      const bool sw = filled(v.x, v.y), se = filled(v.x + 1, v.y);
      const bool nw = filled(v.x, v.y + 1), ne = filled(v.x + 1, v.y + 1);
      switch (d) {
        case 0: return ne && !se;
        case 1: return nw && !ne;
        case 2: return sw && !nw;
        default: return se && !sw;
      }
    };
    const DualSite start{sx - 1, sy - 1};
    DropletRecord rec;
    auto& verts = rec.circuit.vertices;
    DualSite v = start;
    int d = 0;
    do {
      verts.push_back(v);
      v = v + kDir[d];
      const int prefs[3] = {(d + 3) % 4, d, (d + 1) % 4};
      int next = -1;
      for (int cand : prefs)
        if (can_go(v, cand)) { next = cand; break; }
      if (next < 0) throw std::logic_error("exterior_circuit: boundary trace stuck");
      d = next;
    } while (!(v == start && d == 0));

    rec.interior_area = static_cast<double>(fill_count);
    const auto pts = rec.circuit.points();
    rec.diameter = hull_diameter(convex_hull(pts).extreme_points);
    rec.l_eff = std::sqrt(rec.interior_area);
    for (const auto& u : verts) {
      if (u.x <= -L_ + 1 || u.y <= -L_ + 1 || u.x >= L_ - 2 || u.y >= L_ - 2) {
        rec.boundary_contaminated = true;
        break;
      }
    }
    return rec;
  }

 private:
  const Field& f_;
  ExteriorWorkspace& ws_;
  int L_;
};

}  // namespace

std::optional<DropletRecord> exterior_circuit(const BondConfig& config, SiteCoord around) {
  ExteriorWorkspace ws;
  return exterior_circuit(config, around, ws);
}

std::optional<DropletRecord> exterior_circuit(const BondConfig& config, SiteCoord around,
                                              ExteriorWorkspace& ws) {
  return ExteriorSearch<BondConfig>(config, ws).run(around);
}

std::optional<DropletRecord> exterior_circuit(const LazyBondField& field, SiteCoord around,
                                              ExteriorWorkspace& ws) {
  return ExteriorSearch<LazyBondField>(field, ws).run(around);
}

// --- exhaustive enumeration ------------------------------------------------

namespace {

struct Enumerator {
  int L;
  int g;  // dual grid width
  std::vector<DualBond> edges;
  std::vector<std::array<int, 4>> edge_at;  // per dual vertex, per side: edge index or -1
  std::bitset<128> used;
  std::vector<std::vector<std::pair<int, int>>> passes;  // per vertex: (side_in, side_out)
  int e0 = -1;
  int u0 = -1;
  int s0 = -1;
  std::vector<int> path;
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> trails;  // vertex sequences

  int vid(DualSite d) const { return (d.y + L + 1) * g + (d.x + L + 1); }
  DualSite vsite(int i) const { return {i % g - L - 1, i / g - L - 1}; }

  static bool straight(int a, int b) { return (a + 2) % 4 == b; }
  bool crosses(int v, int a, int b) const {
    if (!straight(a, b)) return false;
    for (const auto& [c, d] : passes[v])
      if (c >= 0 && straight(c, d)) return true;
    return false;
  }

  void record() {
    std::vector<int> key(path.begin(), path.end());
    key.push_back(e0);
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) return;
    std::vector<int> verts{u0};
    int v = u0;
    std::vector<int> seq{e0};
    seq.insert(seq.end(), path.begin(), path.end());
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      const auto& b = edges[seq[k]];
      const int a = vid(b.a), c = vid(b.b);
      v = (a == v) ? c : a;
      verts.push_back(v);
    }
    trails.push_back(std::move(verts));
  }

  void dfs(int v, int side_in) {
    if (v == u0 && path.size() + 1 >= 4) {
      // Closing pass (side_in, s0) at the start vertex.
      bool bad = false;
      if (straight(side_in, s0))
        for (const auto& [c, d] : passes[v])
          if (c >= 0 && straight(c, d)) bad = true;
      if (!bad) record();
    }
    for (int s = 0; s < 4; ++s) {
      if (s == side_in) continue;
      const int e = edge_at[v][s];
      if (e < 0 || e <= e0 || used[e]) continue;
      if (crosses(v, side_in, s)) continue;
      passes[v].push_back({side_in, s});
      used.set(e);
      path.push_back(e);
      const auto& b = edges[e];
      const int w = (vid(b.a) == v) ? vid(b.b) : vid(b.a);
      dfs(w, (s + 2) % 4);
      path.pop_back();
      used.reset(e);
      passes[v].pop_back();
    }
  }
};

}  // namespace

std::vector<DualCircuit> enumerate_all_circuits(const BondConfig& config, SiteCoord around) {
  const int L = config.half_width();
  const int g = 2 * L + 2;
  if (g * g > 64) throw std::invalid_argument("enumerate_all_circuits: box too large");
  Enumerator en;
  en.L = L;
  en.g = g;
  en.edge_at.assign(static_cast<std::size_t>(g) * g, {-1, -1, -1, -1});
  en.passes.assign(static_cast<std::size_t>(g) * g, {});
  for (int y = -L - 1; y <= L; ++y) {
    for (int x = -L - 1; x <= L; ++x) {
      const DualSite d{x, y};
      if (x < L && config.dual_open_east(d)) {
        const int e = static_cast<int>(en.edges.size());
        en.edges.push_back(make_dual_bond(d, d + SiteCoord{1, 0}));
        en.edge_at[en.vid(d)][0] = e;
        en.edge_at[en.vid(d + SiteCoord{1, 0})][2] = e;
      }
      if (y < L && config.dual_open_north(d)) {
        const int e = static_cast<int>(en.edges.size());
        en.edges.push_back(make_dual_bond(d, d + SiteCoord{0, 1}));
        en.edge_at[en.vid(d)][1] = e;
        en.edge_at[en.vid(d + SiteCoord{0, 1})][3] = e;
      }
    }
  }
  if (en.edges.size() > 128) throw std::invalid_argument("enumerate_all_circuits: too many bonds");

  for (int e = 0; e < static_cast<int>(en.edges.size()); ++e) {
    en.e0 = e;
    const auto& b = en.edges[e];
    en.u0 = en.vid(b.a);
    en.s0 = b.horizontal() ? 0 : 1;
    en.used.reset();
    en.used.set(e);
    en.passes[en.u0].push_back({-1, en.s0});
    en.dfs(en.vid(b.b), b.horizontal() ? 2 : 3);
    en.passes[en.u0].pop_back();
  }

  std::vector<DualCircuit> out;
  for (const auto& t : en.trails) {
    DualCircuit c;
    for (int v : t) c.vertices.push_back(en.vsite(v));
    if (signed_area(c.points()) < 0) std::reverse(c.vertices.begin(), c.vertices.end());
    const auto inside = enclosed_sites(c);
    if (std::find(inside.begin(), inside.end(), around) != inside.end()) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace droplab
