#include "droplab/tau.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "droplab/errors.hpp"
#include "droplab/rng.hpp"

namespace droplab {

namespace {
constexpr std::uint64_t kBatches = 20;
}

std::vector<SiteCoord> octant_directions(int q_max) {
  if (q_max < 1) throw DomainError("direction grid needs q_max >= 1");
  std::vector<SiteCoord> out;
  for (int q = 1; q <= q_max; ++q)
    for (int r = 0; r <= q; ++r)
      if (std::gcd(q, r) == 1) out.push_back({q, r});
  std::sort(out.begin(), out.end(), [](SiteCoord a, SiteCoord b) {
    return static_cast<long>(a.y) * b.x < static_cast<long>(b.y) * a.x;
  });
  return out;
}

std::vector<SiteCoord> lattice_images(SiteCoord v) {
  std::set<SiteCoord> s;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      s.insert({sx * v.x, sy * v.y});
      s.insert({sx * v.y, sy * v.x});
    }
  return {s.begin(), s.end()};
}

TauNorm::TauNorm(std::vector<SiteCoord> directions, std::vector<double> values,
                 std::vector<double> stderrs)
    : directions_(std::move(directions)), values_(std::move(values)), stderrs_(std::move(stderrs)) {
  if (directions_.empty() || directions_.size() != values_.size())
    throw DomainError("tau: directions and values must be non-empty and of equal length");
  if (stderrs_.empty()) stderrs_.assign(values_.size(), 0.0);
  if (stderrs_.size() != values_.size()) throw DomainError("tau: stderr list has the wrong length");
  double vmax = 0.0;
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("tau values must be positive and finite");
    vmax = std::max(vmax, v);
  }
  std::vector<Point> normals;
  std::vector<double> offsets;
  for (std::size_t i = 0; i < directions_.size(); ++i) {
    for (const auto& u : lattice_images(directions_[i])) {
      const Point n{static_cast<double>(u.x), static_cast<double>(u.y)};
      normals.push_back((1.0 / norm(n)) * n);
      offsets.push_back(values_[i]);
    }
  }
  polar_ = halfplane_intersection(normals, offsets, 4.0 * vmax);
  if (polar_.size() < 3) throw DomainError("tau: degenerate polar body");
}

TauNorm TauNorm::isotropic(double c, int q_max) {
  auto dirs = octant_directions(q_max);
  std::vector<double> vals(dirs.size(), c);
  return TauNorm(std::move(dirs), std::move(vals));
}

TauNorm TauNorm::l1(double c) {
  return TauNorm({{1, 0}, {1, 1}}, {c, c * std::sqrt(2.0)});
}

double TauNorm::operator()(Point x) const { return support(polar_, x); }

TauNorm TauNorm::normalized() const {
  const double e = along_axis();
  std::vector<double> v(values_), s(stderrs_);
  for (auto& a : v) a /= e;
  for (auto& a : s) a /= e;
  TauNorm out(directions_, std::move(v), std::move(s));
  out.p = p;
  out.samples = samples;
  out.seed = seed;
  return out;
}

double ConnectivityEstimate::std_error() const {
  if (samples == 0) return 0.0;
  const double q = probability();
  return std::sqrt(q * (1.0 - q) / static_cast<double>(samples));
}

std::vector<ConnectivityEstimate> estimate_connectivity(double p, const std::vector<SiteCoord>& targets,
                                                        std::uint64_t samples, std::uint64_t seed,
                                                        int L) {
  if (samples < 100) throw DomainError("connectivity estimate needs at least 100 samples");
  for (const auto& t : targets) {
    if (t.x == 0 && t.y == 0) throw DomainError("connectivity target must be nonzero");
    if (L < 2.0 * std::hypot(t.x, t.y)) throw DomainError("box too small for connectivity target");
  }
  const int g = 2 * L + 2;
  auto id = [&](DualSite d) { return (d.y + L + 1) * g + (d.x + L + 1); };
  std::vector<int> target_at(static_cast<std::size_t>(g) * g, -1);
  const std::uint64_t batches = std::min<std::uint64_t>(kBatches, samples);
  std::vector<std::uint64_t> batch_samples(batches, 0);
  for (std::uint64_t b = 0; b < batches; ++b)
    batch_samples[b] = (b + 1) * samples / batches - b * samples / batches;
  std::vector<ConnectivityEstimate> out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    out[i].target = targets[i];
    out[i].samples = samples;
    out[i].batch_hits.assign(batches, 0);
    out[i].batch_samples = batch_samples;
    target_at[id({targets[i].x, targets[i].y})] = static_cast<int>(i);
  }
  std::vector<std::uint32_t> seen(static_cast<std::size_t>(g) * g, 0);
  std::vector<DualSite> stack;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const LazyBondField field(L, p, derive_seed(seed, s));
    const auto stamp = static_cast<std::uint32_t>(s + 1);
    const std::uint64_t batch = s * batches / samples;
    std::size_t remaining = targets.size();
    stack.assign(1, DualSite{0, 0});
    seen[id({0, 0})] = stamp;
    while (!stack.empty() && remaining > 0) {
      const DualSite d = stack.back();
      stack.pop_back();
      const DualSite nb[4] = {d + SiteCoord{1, 0}, d + SiteCoord{-1, 0}, d + SiteCoord{0, 1}, d + SiteCoord{0, -1}};
      const bool open[4] = {field.dual_open_east(d), field.dual_open_east(nb[1]),
                            field.dual_open_north(d), field.dual_open_north(nb[3])};
      for (int k = 0; k < 4; ++k) {
        if (!open[k]) continue;
        const int j = id(nb[k]);
        if (seen[j] == stamp) continue;
        seen[j] = stamp;
        if (target_at[j] >= 0) {
          ++out[target_at[j]].hits;
          ++out[target_at[j]].batch_hits[batch];
          --remaining;
        }
        stack.push_back(nb[k]);
      }
    }
  }
  return out;
}

std::vector<int> default_multipliers(SiteCoord v) {
  const double len = std::hypot(v.x, v.y);
  std::vector<int> ks;
  int k = static_cast<int>(std::ceil(4.0 / len - 1e-12));
  k = std::max(k, 1);
  for (; k * len <= 16.0 + 1e-12; ++k) ks.push_back(k);
  while (ks.size() < 3) ks.push_back(ks.empty() ? k : ks.back() + 1);
  return ks;
}

TauEstimate fit_tau(SiteCoord direction, const std::vector<int>& multipliers,
                    const std::vector<ConnectivityEstimate>& estimates) {
  if (multipliers.size() < 2) throw DomainError("tau fit needs at least two distances");
  TauEstimate est;
  est.direction = direction;
  const double len = std::hypot(direction.x, direction.y);
  std::vector<const ConnectivityEstimate*> used;
  for (int k : multipliers) {
    const SiteCoord t{k * direction.x, k * direction.y};
    auto it = std::find_if(estimates.begin(), estimates.end(),
                           [&](const ConnectivityEstimate& e) { return e.target == t; });
    if (it == estimates.end()) throw DomainError("tau fit: missing connectivity estimate");
    if (it->hits == 0) throw DomainError("tau fit: no connections observed; use more samples or shorter distances");
    const double P = it->probability();
    const double n = static_cast<double>(it->samples);
    used.push_back(&*it);
    est.distances.push_back(k * len);
    est.neg_log_p.push_back(-std::log(P));
    est.neg_log_p_stderr.push_back(std::sqrt((1.0 - P + 1.0 / n) / (n * P)));
  }
  std::vector<double> w;
  for (double e : est.neg_log_p_stderr) w.push_back(1.0 / (e * e));
  auto slope = [&](const std::vector<double>& y, double* sxx_out) {
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sw += w[i];
      sx += w[i] * est.distances[i];
      sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sxx += w[i] * (est.distances[i] - mx) * (est.distances[i] - mx);
      sxy += w[i] * (est.distances[i] - mx) * (y[i] - my);
    }
    if (sxx_out) *sxx_out = sxx;
    return sxy / sxx;
  };
  double sxx = 0;
  est.tau = slope(est.neg_log_p, &sxx);
  est.std_error = std::sqrt(1.0 / sxx);

  const std::size_t batches = used.front()->batch_hits.size();
  bool jackknife = batches >= 2;
  for (const auto* e : used)
    jackknife = jackknife && e->batch_hits.size() == batches && e->batch_samples.size() == batches;
  if (!jackknife) return est;
  std::vector<double> taus;
  std::vector<double> y(used.size());
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < used.size(); ++i) {
      const auto h = used[i]->hits - used[i]->batch_hits[b];
      const auto n = used[i]->samples - used[i]->batch_samples[b];
      if (h == 0 || n == 0) return est;
      y[i] = -std::log(static_cast<double>(h) / static_cast<double>(n));
    }
    taus.push_back(slope(y, nullptr));
  }
  double m = 0;
  for (double t : taus) m += t;
  m /= taus.size();
  double v = 0;
  for (double t : taus) v += (t - m) * (t - m);
  est.std_error = std::sqrt(v * (batches - 1) / batches);
  return est;
}

TauCalibration calibrate_tau(double p, int q_max, std::uint64_t samples, std::uint64_t seed) {
  const auto dirs = octant_directions(q_max);
  std::vector<SiteCoord> targets;
  double reach = 0.0;
  auto add = [&](SiteCoord v) {
    for (int k : default_multipliers(v)) {
      targets.push_back({k * v.x, k * v.y});
      reach = std::max(reach, k * std::hypot(v.x, v.y));
    }
  };
  for (const auto& v : dirs) add(v);
  add({0, 1});
  const int L = std::max(32, static_cast<int>(std::ceil(2.0 * reach)));
  const auto est = estimate_connectivity(p, targets, samples, seed, L);

  TauCalibration cal;
  std::vector<double> vals, errs;
  for (const auto& v : dirs) {
    cal.estimates.push_back(fit_tau(v, default_multipliers(v), est));
    vals.push_back(cal.estimates.back().tau);
    errs.push_back(cal.estimates.back().std_error);
  }
  cal.vertical = fit_tau({0, 1}, default_multipliers({0, 1}), est);
  cal.norm = TauNorm(dirs, vals, errs);
  cal.norm.p = p;
  cal.norm.samples = samples;
  cal.norm.seed = seed;
  return cal;
}

void write_tau_json(std::ostream& out, const TauNorm& norm) {
  nlohmann::json j;
  j["version"] = 1;
  j["p"] = norm.p;
  j["samples"] = norm.samples;
  j["seed"] = norm.seed;
  j["directions"] = nlohmann::json::array();
  for (const auto& d : norm.directions()) j["directions"].push_back({d.x, d.y});
  j["tau"] = norm.values();
  j["stderr"] = norm.stderrs();
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing tau calibration");
}

TauNorm read_tau_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("tau calibration is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw IoError("unsupported tau calibration version");
    std::vector<SiteCoord> dirs;
    for (const auto& d : j.at("directions")) dirs.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
    TauNorm norm(dirs, j.at("tau").get<std::vector<double>>(), j.at("stderr").get<std::vector<double>>());
    norm.p = j.at("p").get<double>();
    norm.samples = j.at("samples").get<std::uint64_t>();
    norm.seed = j.at("seed").get<std::uint64_t>();
    return norm;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed tau calibration: ") + e.what());
  }
}

TauNorm load_tau_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_tau_json(in);
}

}  // namespace droplab
