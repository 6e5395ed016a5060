#include "droplab/lattice.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "droplab/errors.hpp"
#include "droplab/rng.hpp"

namespace droplab {

namespace {

std::uint64_t open_threshold(double p) {
  return static_cast<std::uint64_t>(std::ceil(std::ldexp(p, 53)));
}

std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

}  // namespace

Bond make_bond(SiteCoord a, SiteCoord b) {
  const int d = std::abs(a.x - b.x) + std::abs(a.y - b.y);
  if (d != 1) throw std::invalid_argument("make_bond: endpoints are not nearest neighbours");
  if (b < a) std::swap(a, b);
  return {a, b};
}

DualBond make_dual_bond(DualSite a, DualSite b) {
  const int d = std::abs(a.x - b.x) + std::abs(a.y - b.y);
  if (d != 1) throw std::invalid_argument("make_dual_bond: endpoints are not nearest neighbours");
  if (b < a) std::swap(a, b);
  return {a, b};
}

DualBond dual_bond(const Bond& b) {
  if (b.horizontal()) return make_dual_bond({b.a.x, b.a.y - 1}, {b.a.x, b.a.y});
  return make_dual_bond({b.a.x - 1, b.a.y}, {b.a.x, b.a.y});
}

Bond primal_partner(const DualBond& db) {
  if (db.horizontal()) {
    // <(a,b)*, (a+1,b)*> crosses the vertical bond at x = a+1.
    return make_bond({db.a.x + 1, db.a.y}, {db.a.x + 1, db.a.y + 1});
  }
  return make_bond({db.a.x, db.a.y + 1}, {db.a.x + 1, db.a.y + 1});
}

BondConfig::BondConfig(int half_width, double p, std::uint64_t seed, bool open)
    : L_(half_width), p_(p), seed_(seed) {
  if (half_width < 1) throw DomainError("box half width must be >= 1");
  const auto n = static_cast<std::size_t>(2 * L_) * (2 * L_ + 1);
  const std::uint64_t fill = open ? ~std::uint64_t{0} : 0;
  h_.assign(words_for(n), fill);
  v_.assign(words_for(n), fill);
  if (open && (n & 63)) {
    h_.back() &= (std::uint64_t{1} << (n & 63)) - 1;
    v_.back() &= (std::uint64_t{1} << (n & 63)) - 1;
  }
}

bool BondConfig::contains(const Bond& b) const {
  return b.horizontal() ? has_h(b.a.x, b.a.y) : has_v(b.a.x, b.a.y);
}

bool BondConfig::is_open(const Bond& b) const {
  if (!contains(b)) throw std::out_of_range("bond outside the box");
  return b.horizontal() ? open_h(b.a.x, b.a.y) : open_v(b.a.x, b.a.y);
}

void BondConfig::set_open(const Bond& b, bool open) {
  if (!contains(b)) throw std::out_of_range("bond outside the box");
  if (b.horizontal()) assign(h_, hindex(b.a.x, b.a.y), open);
  else assign(v_, vindex(b.a.x, b.a.y), open);
}

std::size_t BondConfig::bond_count() const {
  return 2 * static_cast<std::size_t>(2 * L_) * (2 * L_ + 1);
}

std::size_t BondConfig::open_count() const {
  std::size_t c = 0;
  for (auto w : h_) c += std::popcount(w);
  for (auto w : v_) c += std::popcount(w);
  return c;
}

BondConfig embed(const BondConfig& config, int half_width) {
  const int L = config.half_width();
  if (half_width < L) throw std::invalid_argument("embed: target box is smaller");
  BondConfig out(half_width, config.p(), config.seed(), true);
  for (int y = -L; y <= L; ++y)
    for (int x = -L; x <= L; ++x) {
      if (config.has_h(x, y) && !config.open_h(x, y)) out.set_open(make_bond({x, y}, {x + 1, y}), false);
      if (config.has_v(x, y) && !config.open_v(x, y)) out.set_open(make_bond({x, y}, {x, y + 1}), false);
    }
  return out;
}

std::uint64_t bond_enumeration_index(int L, const Bond& b) {
  const auto row_len = static_cast<std::uint64_t>(4 * L + 1);
  const auto i = static_cast<std::uint64_t>(b.a.x + L);
  const auto row = static_cast<std::uint64_t>(b.a.y + L);
  if (b.a.y == L) return row * row_len + i;  // top row: horizontal bonds only
  if (b.horizontal()) return row * row_len + 2 * i;
  return row * row_len + (i < static_cast<std::uint64_t>(2 * L) ? 2 * i + 1 : 2 * i);
}

BondConfig sample_config(int L, double p, std::uint64_t seed) {
  if (!(p > 0.5 && p < 1.0)) throw DomainError("p must lie in (1/2, 1) (supercritical regime)");
  if (L < 1) throw DomainError("box half width must be >= 1");
  BondConfig c(L, p, seed, false);
  const std::uint64_t t = open_threshold(p);
  std::uint64_t k = 0;
  for (int y = -L; y <= L; ++y) {
    for (int x = -L; x <= L; ++x) {
      if (x < L) {
        if ((stream_word(seed, k++) >> 11) < t) BondConfig::assign(c.h_, c.hindex(x, y), true);
      }
      if (y < L) {
        if ((stream_word(seed, k++) >> 11) < t) BondConfig::assign(c.v_, c.vindex(x, y), true);
      }
    }
  }
  return c;
}

bool is_dual_open(const BondConfig& config, const DualBond& db) {
  return !config.is_open(primal_partner(db));
}

LazyBondField::LazyBondField(int L, double p, std::uint64_t seed)
    : L_(L), seed_(seed), threshold_(open_threshold(p)) {
  if (!(p > 0.5 && p < 1.0)) throw DomainError("p must lie in (1/2, 1) (supercritical regime)");
  if (L < 1) throw DomainError("box half width must be >= 1");
}

bool LazyBondField::open_h(int x, int y) const {
  const auto k = bond_enumeration_index(L_, Bond{{x, y}, {x + 1, y}});
  return (stream_word(seed_, k) >> 11) < threshold_;
}

bool LazyBondField::open_v(int x, int y) const {
  const auto k = bond_enumeration_index(L_, Bond{{x, y}, {x, y + 1}});
  return (stream_word(seed_, k) >> 11) < threshold_;
}

// --- snapshot ------------------------------------------------------------

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf{};
  std::uint64_t u = 0;
  std::memcpy(&u, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(buf.data(), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), sizeof(T));
  if (!in) throw IoError("truncated snapshot");
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v{};
  std::memcpy(&v, &u, sizeof(T));
  return v;
}

void put_plane(std::ostream& out, const std::vector<std::uint64_t>& plane, std::size_t bits) {
  for (std::size_t byte = 0; byte < (bits + 7) / 8; ++byte) {
    const auto w = plane[byte / 8];
    out.put(static_cast<char>((w >> (8 * (byte % 8))) & 0xff));
  }
}

void get_plane(std::istream& in, std::vector<std::uint64_t>& plane, std::size_t bits) {
  for (std::size_t byte = 0; byte < (bits + 7) / 8; ++byte) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw IoError("truncated snapshot");
    plane[byte / 8] |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * (byte % 8));
  }
}

}  // namespace

void write_snapshot(std::ostream& out, const BondConfig& c) {
  out.write("DLAB", 4);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.half_width()));
  put_le<double>(out, c.p());
  put_le<std::uint64_t>(out, c.seed());
  const auto bits = c.bond_count() / 2;
  put_plane(out, c.horizontal_plane(), bits);
  put_plane(out, c.vertical_plane(), bits);
  if (!out) throw IoError("failed writing snapshot");
}

BondConfig read_snapshot(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "DLAB") throw IoError("not a DLAB snapshot");
  const auto version = get_le<std::uint16_t>(in);
  if (version != 1) throw IoError("unsupported snapshot version " + std::to_string(version));
  const auto L = static_cast<int>(get_le<std::uint32_t>(in));
  const auto p = get_le<double>(in);
  const auto seed = get_le<std::uint64_t>(in);
  BondConfig c(L, p, seed, false);
  const auto bits = c.bond_count() / 2;
  get_plane(in, c.h_, bits);
  get_plane(in, c.v_, bits);
  return c;
}

}  // namespace droplab
