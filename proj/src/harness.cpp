#include "droplab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <filesystem>
#include <functional>
#include <numeric>
#include <thread>

#include "json.hpp"

#include "droplab/bridge.hpp"
#include "droplab/circuit.hpp"
#include "droplab/errors.hpp"
#include "droplab/renewal.hpp"
#include "droplab/rng.hpp"
#include "droplab/roughness.hpp"
#include "droplab/skeleton.hpp"
#include "droplab/wulff.hpp"

namespace droplab {

namespace {

const std::pair<Mode, const char*> kModes[] = {
    {Mode::DropletScan, "droplet-scan"}, {Mode::TauCalibrate, "tau-calibrate"},
    {Mode::RenewalStats, "renewal-stats"}, {Mode::BridgeScan, "bridge-scan"},
    {Mode::SkeletonAudit, "skeleton-audit"}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T v{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw UsageError("bad value for " + key + ": '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw UsageError("empty list for " + key);
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) s += fmt(v[i]);
    else s += std::to_string(v[i]);
  }
  return s;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw UsageError("bad value for " + key + ": '" + text + "'");
}

}  // namespace

std::string mode_name(Mode m) {
  for (const auto& [mode, name] : kModes)
    if (mode == m) return name;
  return "?";
}

Mode parse_mode(const std::string& name) {
  for (const auto& [mode, n] : kModes)
    if (name == n) return mode;
  throw UsageError("unknown mode '" + name + "'");
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") c.mode = parse_mode(trim(value));
  else if (key == "p") c.p = parse_number<double>(key, value);
  else if (key == "box") c.boxes = parse_list<int>(key, value);
  else if (key == "replicas") c.replicas = parse_number<std::uint64_t>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "theta") c.theta = parse_number<double>(key, value);
  else if (key == "lambda") c.lambda = parse_number<double>(key, value);
  else if (key == "epsilon") c.epsilon = parse_number<double>(key, value);
  else if (key == "delta") c.delta = parse_number<double>(key, value);
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "min-l") c.min_l = parse_number<double>(key, value);
  else if (key == "out") c.out = trim(value);
  else if (key == "tau") c.tau_file = trim(value);
  else if (key == "tau-samples") c.tau_samples = parse_number<std::uint64_t>(key, value);
  else if (key == "q-max") c.q_max = parse_number<int>(key, value);
  else if (key == "scales") c.scales = parse_list<double>(key, value);
  else if (key == "lengths") c.lengths = parse_list<int>(key, value);
  else if (key == "bin-ratio") c.bin_ratio = parse_number<double>(key, value);
  else if (key == "min-bin-count") c.min_bin_count = parse_number<std::uint64_t>(key, value);
  else if (key == "bootstrap") c.bootstrap = parse_number<std::uint64_t>(key, value);
  else if (key == "exchange-length") c.exchange_length = parse_number<int>(key, value);
  else if (key == "exchange-sweeps") c.exchange_sweeps = parse_number<int>(key, value);
  else if (key == "exchange-samples") c.exchange_samples = parse_number<std::uint64_t>(key, value);
  else if (key == "calibrate") c.calibrate = parse_bool(key, value);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
  else throw UsageError("unknown config key '" + key + "'");
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  out << "mode = " << mode_name(c.mode) << '\n'
      << "p = " << fmt(c.p) << '\n'
      << "box = " << join(c.boxes) << '\n'
      << "replicas = " << c.replicas << '\n'
      << "seed = " << c.seed << '\n'
      << "theta = " << fmt(c.theta) << '\n'
      << "lambda = " << fmt(c.lambda) << '\n'
      << "epsilon = " << fmt(c.epsilon) << '\n'
      << "delta = " << fmt(c.delta) << '\n'
      << "gamma = " << fmt(c.gamma) << '\n'
      << "min-l = " << fmt(c.min_l) << '\n'
      << "out = " << c.out << '\n'
      << "tau = " << c.tau_file << '\n'
      << "tau-samples = " << c.tau_samples << '\n'
      << "q-max = " << c.q_max << '\n'
      << "scales = " << join(c.scales) << '\n'
      << "lengths = " << join(c.lengths) << '\n'
      << "bin-ratio = " << fmt(c.bin_ratio) << '\n'
      << "min-bin-count = " << c.min_bin_count << '\n'
      << "bootstrap = " << c.bootstrap << '\n'
      << "exchange-length = " << c.exchange_length << '\n'
      << "exchange-sweeps = " << c.exchange_sweeps << '\n'
      << "exchange-samples = " << c.exchange_samples << '\n'
      << "calibrate = " << (c.calibrate ? "true" : "false") << '\n'
      << "threads = " << c.threads << '\n';
}

ExperimentConfig read_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
  };
  need(c.p > 0.5 && c.p < 1.0, "p must lie in (1/2, 1)");
  need(!c.boxes.empty(), "box list is empty");
  for (int L : c.boxes) need(L >= 4, "box half widths must be at least 4");
  need(c.replicas >= 1, "replicas must be positive");
  need(c.theta > 0 && c.theta < 1, "theta must lie in (0, 1)");
  need(c.lambda > 0 && c.lambda <= 1, "lambda must lie in (0, 1]");
  need(c.epsilon > 0 && c.epsilon < 0.5, "epsilon must lie in (0, 1/2)");
  need(c.delta > 0 && c.delta < 1, "delta must lie in (0, 1)");
  need(c.gamma > 0 && c.gamma < 1, "gamma must lie in (0, 1)");
  need(c.min_l > 0, "min-l must be positive");
  need(!c.out.empty(), "out must name a directory");
  need(c.tau_samples >= 100, "tau-samples must be at least 100");
  need(c.q_max >= 1 && c.q_max <= 24, "q-max must lie in [1, 24]");
  need(c.scales.size() >= 3, "need at least 3 bridge scales");
  for (std::size_t i = 0; i < c.scales.size(); ++i) {
    need(c.scales[i] >= 2, "bridge scales must be at least 2");
    if (i) need(c.scales[i] > c.scales[i - 1], "bridge scales must increase");
  }
  need(!c.lengths.empty(), "lengths list is empty");
  for (int n : c.lengths) need(n >= 2, "slab lengths must be at least 2");
  need(c.bin_ratio > 1, "bin-ratio must exceed 1");
  need(c.exchange_length >= 4, "exchange-length must be at least 4");
  need(c.exchange_sweeps >= 1, "exchange-sweeps must be positive");
  need(c.exchange_samples >= 1, "exchange-samples must be positive");
  need(c.threads >= 1 && c.threads <= 256, "threads must lie in [1, 256]");
  if (c.mode == Mode::BridgeScan) need(c.replicas >= 30, "bridge-scan needs at least 30 replicas");
}

BinnedStats condition_by_binning(const std::vector<ScanRow>& rows, double min_l, double ratio,
                                 std::uint64_t bootstrap, std::uint64_t seed) {
  BinnedStats out;
  std::map<long, std::vector<const ScanRow*>> groups;
  for (const auto& r : rows) {
    if (r.contaminated) {
      ++out.excluded["contaminated"];
      continue;
    }
    if (r.l_eff < min_l) {
      ++out.excluded["below min-l"];
      continue;
    }
    if (r.diam >= 8.0 * std::numbers::sqrt2 * r.l_eff) {
      ++out.excluded["diam >= 8 sqrt(2) l_eff"];
      continue;
    }
    auto j = static_cast<long>(std::floor(std::log(r.l_eff / min_l) / std::log(ratio)));
    if (r.l_eff < min_l * std::pow(ratio, j)) --j;
    else if (r.l_eff >= min_l * std::pow(ratio, j + 1)) ++j;
    groups[j].push_back(&r);
  }
  if (groups.empty()) {
    out.notice = "no rows with l_eff >= " + fmt(min_l) + " passed the filters";
    return out;
  }
  for (const auto& [j, g] : groups) {
    Bin b;
    b.l_low = min_l * std::pow(ratio, j);
    b.l_high = min_l * std::pow(ratio, j + 1);
    b.count = g.size();
    std::vector<double> a, m, l;
    std::size_t confined = 0;
    for (const auto* r : g) {
      a.push_back(r->alr);
      m.push_back(r->mlr);
      l.push_back(r->l_eff);
      confined += r->confined;
    }
    b.mean_l = mean(l);
    b.mean_alr = mean(a);
    b.mean_mlr = mean(m);
    b.median_alr = median(a);
    b.median_mlr = median(m);
    const auto bs = derive_seed(seed, static_cast<std::uint64_t>(j + (1L << 20)));
    if (bootstrap > 0) {
      b.alr_ci = bootstrap_ci(a, bootstrap, derive_seed(bs, 0));
      b.mlr_ci = bootstrap_ci(m, bootstrap, derive_seed(bs, 1));
    }
    b.confined_fraction = static_cast<double>(confined) / b.count;
    out.bins.push_back(b);
  }
  return out;
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pairs, double log_power) {
  std::set<double> distinct;
  std::vector<double> x, y;
  for (const auto& [l, v] : pairs) {
    if (!(l > 1.0) || !(v > 0.0)) throw DomainError("fit_exponent: needs l > 1 and positive values");
    distinct.insert(l);
    x.push_back(std::log(std::cbrt(l) * std::pow(std::log(l), log_power)));
    y.push_back(std::log(v));
  }
  if (distinct.size() < 4) throw DomainError("fit_exponent: needs at least 4 distinct l values");
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
    throw DomainError("fit_exponent: constant values");
  ExponentFit f;
  f.fit = least_squares(x, y);
  f.exponent = f.fit.slope / 3.0;
  f.exponent_low = f.fit.ci_low / 3.0;
  f.exponent_high = f.fit.ci_high / 3.0;
  return f;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const std::domain_error*>(&e)) return 4;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return 4;
  if (dynamic_cast<const std::out_of_range*>(&e)) return 4;
  return 1;
}

TauNorm resolve_tau(const ExperimentConfig& c) {
  if (!c.tau_file.empty()) return load_tau_file(c.tau_file);
  return calibrate_tau(c.p, c.q_max, c.tau_samples, derive_seed(c.seed, 0x7a75)).norm;
}

}  // namespace droplab

namespace droplab {

namespace {

using nlohmann::json;

class Output {
 public:
  Output(const ExperimentConfig& c, RunResult& result) : dir_(c.out), result_(result) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << content;
    f.close();
    if (!f) throw IoError("failed writing " + path.string());
    result_.files.push_back(path.string());
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

 private:
  std::filesystem::path dir_;
  RunResult& result_;
};

// Config entries that determine the results (no output directory, no thread count).
json config_json(const ExperimentConfig& c) {
  std::ostringstream ss;
  write_config(ss, c);
  json j = json::object();
  std::istringstream in(ss.str());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    const std::string key = trim(line.substr(0, eq));
    if (key == "out" || key == "threads") continue;
    j[key] = trim(line.substr(eq + 1));
  }
  return j;
}

json fit_json(const LinearFit& f) {
  return {{"slope", f.slope},         {"intercept", f.intercept}, {"slope_stderr", f.slope_stderr},
          {"ci_low", f.ci_low},       {"ci_high", f.ci_high},     {"r_squared", f.r_squared},
          {"points", f.n}};
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

// Runs body(i, worker) for i in [0, n) over `threads` workers; each worker
// owns index set {w, w + threads, ...}.
void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t, unsigned)>& body) {
  if (threads <= 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) body(i, 0);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::uint64_t i = w; i < n; i += threads) body(i, w);
    });
}

// ---- droplet scan ----

struct Measured {
  std::optional<ScanRow> row;
  const char* dropped = nullptr;
};

Measured measure_droplet(const DropletRecord& d, const TauNorm& tau, double theta) {
  Measured m;
  ScanRow r;
  r.l_eff = d.l_eff;
  r.area = d.interior_area;
  r.diam = d.diameter;
  r.contaminated = d.boundary_contaminated;
  const ConvexHull hull = convex_hull(d.circuit);
  const Polygon pts = d.circuit.points();
  r.alr = alr(pts, hull);
  r.mlr = mlr(pts, hull);
  if (r.alr > r.mlr + 1e-12) {
    m.dropped = "alr > mlr";
    return m;
  }
  if (!(d.l_eff > std::numbers::e)) {
    m.dropped = "l_eff <= e (skeleton scale undefined)";
    return m;
  }
  const ScaleParams sp = scale_params(d.l_eff, theta);
  if (diameters(hull, tau).diam_tau < 2.0 * sp.s) {
    m.dropped = "tau-diameter below 2s";
    return m;
  }
  const HullSkeleton skel = hull_skeleton(hull, sp.s, tau);
  r.m_plus_1 = skel.points.size();
  r.n_long_sides = skel.long_sides.size();
  r.confined = circuit_confined(d.circuit, annulus_and_tubes(skel, sp.d));
  m.row = r;
  return m;
}

std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string s = "box,replica,seed,l_eff,area,diam,alr,mlr,m_plus_1,n_long_sides,confined,contaminated\n";
  for (const auto& r : rows) {
    s += std::to_string(r.box) + ',' + std::to_string(r.replica) + ',' + std::to_string(r.seed) + ',' +
         fmt(r.l_eff) + ',' + fmt(r.area) + ',' + fmt(r.diam) + ',' + fmt(r.alr) + ',' + fmt(r.mlr) + ',' +
         std::to_string(r.m_plus_1) + ',' + std::to_string(r.n_long_sides) + ',' + csv_bool(r.confined) + ',' +
         csv_bool(r.contaminated) + '\n';
  }
  return s;
}

json exponent_json(const std::vector<std::pair<double, double>>& pairs, double c) {
  try {
    const ExponentFit f = fit_exponent(pairs, c);
    json j = fit_json(f.fit);
    j["exponent"] = f.exponent;
    j["exponent_ci_low"] = f.exponent_low;
    j["exponent_ci_high"] = f.exponent_high;
    j["log_power"] = c;
    return j;
  } catch (const DomainError& e) {
    return {{"error", e.what()}, {"log_power", c}};
  }
}

void droplet_scan(const ExperimentConfig& c, std::ostream& log, Output& out) {
  const TauNorm tau = resolve_tau(c).normalized();
  std::vector<ScanRow> rows;
  std::map<std::string, std::size_t> dropped;
  std::uint64_t droplets = 0;
  for (std::size_t li = 0; li < c.boxes.size(); ++li) {
    const int L = c.boxes[li];
    const std::uint64_t box_seed = derive_seed(c.seed, li);
    std::vector<std::optional<Measured>> results(c.replicas);
    std::vector<ExteriorWorkspace> ws(std::max(1u, c.threads));
    parallel_for(c.replicas, c.threads, [&](std::uint64_t r, unsigned w) {
      const LazyBondField field(L, c.p, derive_seed(box_seed, r));
      const auto d = exterior_circuit(field, {0, 0}, ws[w]);
      if (d) results[r] = measure_droplet(*d, tau, c.theta);
    });
    std::uint64_t found = 0, kept = 0;
    for (std::uint64_t r = 0; r < c.replicas; ++r) {
      if (!results[r]) continue;
      ++found;
      if (results[r]->dropped) {
        ++dropped[results[r]->dropped];
        continue;
      }
      ScanRow row = *results[r]->row;
      row.box = L;
      row.replica = r;
      row.seed = derive_seed(box_seed, r);
      rows.push_back(row);
      ++kept;
    }
    droplets += found;
    log << "droplet-scan L=" << L << ": " << c.replicas << " replicas, " << found << " droplets, " << kept
        << " rows\n";
  }
  out.write(mode_name(c.mode) + ".csv", scan_csv(rows));

  const BinnedStats binned = condition_by_binning(rows, c.min_l, c.bin_ratio, c.bootstrap, derive_seed(c.seed, 0xb1));
  json bins = json::array();
  std::vector<std::pair<double, double>> mlr_pairs, alr_pairs;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& b : binned.bins) {
    const bool in_fit = b.count >= c.min_bin_count;
    const double ratio = b.mean_alr > 0 ? b.mean_mlr / b.mean_alr : std::numeric_limits<double>::infinity();
    bins.push_back({{"l_low", b.l_low},
                    {"l_high", b.l_high},
                    {"count", b.count},
                    {"mean_l_eff", b.mean_l},
                    {"mean_alr", b.mean_alr},
                    {"mean_mlr", b.mean_mlr},
                    {"median_alr", b.median_alr},
                    {"median_mlr", b.median_mlr},
                    {"alr_ci", {b.alr_ci.low, b.alr_ci.high}},
                    {"mlr_ci", {b.mlr_ci.low, b.mlr_ci.high}},
                    {"mlr_over_alr", b.mean_alr > 0 ? json(ratio) : json(nullptr)},
                    {"confined_fraction", b.confined_fraction},
                    {"in_fit", in_fit}});
    if (!in_fit) continue;
    min_ratio = std::min(min_ratio, ratio);
    mlr_pairs.emplace_back(b.mean_l, b.mean_mlr);
    alr_pairs.emplace_back(b.mean_l, b.mean_alr);
  }
  json summary;
  summary["mode"] = mode_name(c.mode);
  summary["config"] = config_json(c);
  summary["method"] =
      "unconditional sampling binned by l_eff = sqrt(interior area); per-bin statistics approximate the law "
      "conditioned on |Int| >= l^2 at l = l_eff";
  summary["replicas_total"] = c.replicas * c.boxes.size();
  summary["droplets"] = droplets;
  summary["rows"] = rows.size();
  summary["dropped"] = dropped;
  summary["excluded_from_bins"] = binned.excluded;
  summary["notice"] = binned.notice;
  summary["bins"] = bins;
  summary["bins_in_fit"] = mlr_pairs.size();
  summary["min_bin_count"] = c.min_bin_count;
  summary["fit_mlr_c0"] = exponent_json(mlr_pairs, 0.0);
  summary["fit_mlr_c_minus_2_3"] = exponent_json(mlr_pairs, -2.0 / 3.0);
  summary["fit_alr_c0"] = exponent_json(alr_pairs, 0.0);
  summary["min_mlr_over_alr"] = mlr_pairs.empty() ? json(nullptr) : json(min_ratio);
  out.write_json(mode_name(c.mode) + "_summary.json", summary);
}

// ---- tau calibration ----

void tau_calibration(const ExperimentConfig& c, std::ostream& log, Output& out) {
  const TauCalibration cal = calibrate_tau(c.p, c.q_max, c.tau_samples, c.seed);
  std::ostringstream tj;
  write_tau_json(tj, cal.norm);
  out.write("tau.json", tj.str());

  std::string csv = "q,r,distance,neg_log_p,neg_log_p_stderr,tau,tau_stderr\n";
  auto add = [&](const TauEstimate& e) {
    for (std::size_t i = 0; i < e.distances.size(); ++i)
      csv += std::to_string(e.direction.x) + ',' + std::to_string(e.direction.y) + ',' + fmt(e.distances[i]) + ',' +
             fmt(e.neg_log_p[i]) + ',' + fmt(e.neg_log_p_stderr[i]) + ',' + fmt(e.tau) + ',' + fmt(e.std_error) +
             '\n';
  };
  for (const auto& e : cal.estimates) add(e);
  add(cal.vertical);
  out.write(mode_name(c.mode) + ".csv", csv);

  const TauEstimate& e1 = cal.estimates.front();
  const double te = e1.tau, se = e1.std_error;
  json dirs = json::array();
  std::size_t bound_violations = 0, decay_violations = 0;
  for (const auto& e : cal.estimates) {
    const double ratio = e.tau;
    const double sr = std::hypot(e.std_error, se);
    const bool lower = ratio + 2.0 * sr >= te / std::numbers::sqrt2;
    const bool upper = ratio - 2.0 * sr <= std::numbers::sqrt2 * te;
    bound_violations += !(lower && upper);
    std::size_t decay = 0;
    for (std::size_t i = 0; i < e.distances.size(); ++i)
      decay += e.neg_log_p[i] / e.distances[i] < e.tau - 2.0 * e.std_error;
    decay_violations += decay;
    dirs.push_back({{"direction", {e.direction.x, e.direction.y}},
                    {"tau", e.tau},
                    {"stderr", e.std_error},
                    {"tau_per_length", ratio},
                    {"lower_bound_ok", lower},
                    {"upper_bound_ok", upper},
                    {"upper_decay_violations", decay}});
  }
  const double joint = std::hypot(se, cal.vertical.std_error);
  const WulffShape w = build_wulff(cal.norm);
  const LinearFit axis = least_squares(e1.distances, e1.neg_log_p);

  json summary;
  summary["mode"] = mode_name(c.mode);
  summary["config"] = config_json(c);
  summary["directions"] = dirs;
  summary["bound_violations"] = bound_violations;
  summary["upper_decay_violations"] = decay_violations;
  summary["tau_e1"] = te;
  summary["tau_e1_stderr"] = se;
  summary["tau_e2"] = cal.vertical.tau;
  summary["tau_e2_stderr"] = cal.vertical.std_error;
  summary["symmetry_within_2sigma"] = std::abs(te - cal.vertical.tau) <= 2.0 * joint;
  summary["axis_log_linear_r_squared"] = axis.r_squared;
  summary["wulff_constant"] = w.wulff_constant;
  summary["wulff_area"] = w.area;
  summary["four_tau_e"] = 4.0 * cal.norm.along_axis();
  summary["wulff_below_square"] = w.wulff_constant <= 4.0 * cal.norm.along_axis();
  out.write_json(mode_name(c.mode) + "_summary.json", summary);
  log << "tau-calibrate p=" << fmt(c.p) << ": tau(e1) = " << fmt(te) << " +- " << fmt(se)
      << ", Wulff constant " << fmt(w.wulff_constant) << '\n';
}

// ---- bridge scan ----

void bridge_scan(const ExperimentConfig& c, std::ostream& log, Output& out) {
  const BridgeScan scan =
      bridge_mlr_scan(c.scales, static_cast<int>(c.replicas), c.seed, std::max(1u, c.threads));
  std::string csv = "l,n,replicas,mean_mlr,stderr,slope_fit\n";
  for (const auto& r : scan.rows)
    csv += fmt(r.l) + ',' + std::to_string(r.n) + ',' + std::to_string(r.replicas) + ',' + fmt(r.mean_mlr) + ',' +
           fmt(r.std_error) + ',' + fmt(scan.fit.slope) + '\n';
  out.write(mode_name(c.mode) + ".csv", csv);
  json summary;
  summary["mode"] = mode_name(c.mode);
  summary["config"] = config_json(c);
  summary["regressor"] = "log(l^{1/3} (log l)^{2/3})";
  summary["fit"] = fit_json(scan.fit);
  summary["prefactor"] = std::exp(scan.fit.intercept);
  summary["target_window"] = {0.9, 1.1};
  summary["slope_in_window"] = scan.fit.slope >= 0.9 && scan.fit.slope <= 1.1;
  out.write_json(mode_name(c.mode) + "_summary.json", summary);
  log << "bridge-scan: slope " << fmt(scan.fit.slope) << " [" << fmt(scan.fit.ci_low) << ", "
      << fmt(scan.fit.ci_high) << "]\n";
}

// ---- renewal statistics ----

struct SlabRow {
  std::string t_slope;
  double length = 0.0;
  bool connected = false;
  std::size_t n_regen = 0;
  std::size_t n_large = 0;
  double max_abs_partial_sum = 0.0;
  bool confined = false;
};

int delta_bin(double v) {
  const long r = std::lround(v);
  return static_cast<int>(std::clamp(r, -2L, 2L)) + 2;
}

// Spacing and skip rules of the thinned sequence; true when they hold.
bool select_q_ok(const std::vector<DualSite>& regen, const SlabSpec& slab, double delta) {
  const auto q = select_Q(regen, slab, delta);
  const auto N = static_cast<std::size_t>(std::floor(delta * slab.length()));
  if (!q) return regen.size() < N;
  if (q->size() != N / 8) return false;
  const long step = slab.step();
  long prev = 0;
  std::size_t prev_index = 0;
  for (std::size_t j = 0; j < q->size(); ++j) {
    const long pj = slab.proj((*q)[j]);
    const auto it = std::find(regen.begin(), regen.end(), (*q)[j]);
    if (it == regen.end()) return false;
    const auto idx = static_cast<std::size_t>(it - regen.begin());
    if (j == 0) {
      if (pj < slab.proj(slab.x) + 4 * step) return false;
    } else {
      if (pj < prev + 8 * step) return false;
      if (idx - prev_index - 1 > 7) return false;
    }
    prev = pj;
    prev_index = idx;
  }
  return true;
}

void renewal_stats(const ExperimentConfig& c, std::ostream& log, Output& out) {
  const int q = static_cast<int>(std::floor(1.0 / c.lambda)) + 1;
  std::vector<SiteCoord> dirs;
  for (int r = 0; r <= q; ++r) {
    const int g = std::gcd(q, r);
    const SiteCoord t{q / g, r / g};
    if (std::find(dirs.begin(), dirs.end(), t) == dirs.end()) dirs.push_back(t);
  }

  std::vector<SlabRow> rows;
  std::size_t q_checked = 0, q_violations = 0, tube_violations = 0;
  json cells = json::array();
  std::vector<double> len_x, regen_y, large_y;
  for (std::size_t ti = 0; ti < dirs.size(); ++ti) {
    const SiteCoord t = dirs[ti];
    const double tl = std::hypot(t.x, t.y);
    for (std::size_t ni = 0; ni < c.lengths.size(); ++ni) {
      const int n = c.lengths[ni];
      const DualSite y{static_cast<int>(std::lround(n * t.x / tl)), static_cast<int>(std::lround(n * t.y / tl))};
      const SlabSpec slab(t, {0, 0}, y);
      const int L = n + 4;
      const double d = scale_params(std::max<double>(n, 3.0), c.theta).d;
      const std::uint64_t cell_seed = derive_seed(derive_seed(c.seed, ti), ni);
      std::size_t connected = 0, few_regen = 0, many_large = 0;
      double sum_regen = 0, sum_large = 0;
      for (std::uint64_t r = 0; r < c.replicas; ++r) {
        const LazyBondField field(L, c.p, derive_seed(cell_seed, r));
        const RenewalRecord rec = renewal_record(field, slab);
        SlabRow row;
        row.t_slope = std::to_string(t.y) + "/" + std::to_string(t.x);
        row.length = slab.length();
        row.connected = rec.connected_htilde;
        if (row.connected) {
          row.n_regen = rec.regen_points.size();
          for (double v : rec.increments) row.n_large += std::abs(v) >= 0.5;
          const TubeStats ts = tube_confinement_stats(field, rec, d);
          row.max_abs_partial_sum = ts.max_abs_partial_sum;
          row.confined = ts.connected_in_tube;
          if (ts.max_abs_partial_sum > 2.0 * d && ts.regen_outside_tube == 0) ++tube_violations;
          ++q_checked;
          q_violations += !select_q_ok(rec.regen_points, slab, c.delta);
          ++connected;
          few_regen += row.n_regen < c.delta * row.length;
          many_large += row.n_large > c.gamma * row.length;
          sum_regen += row.n_regen;
          sum_large += row.n_large;
          len_x.push_back(row.length);
          regen_y.push_back(static_cast<double>(row.n_regen));
          large_y.push_back(static_cast<double>(row.n_large));
        }
        rows.push_back(row);
      }
      cells.push_back({{"t", {t.x, t.y}},
                       {"length", slab.length()},
                       {"samples", c.replicas},
                       {"connected", connected},
                       {"mean_regen", connected ? json(sum_regen / connected) : json(nullptr)},
                       {"mean_large_increments", connected ? json(sum_large / connected) : json(nullptr)},
                       {"fraction_regen_below_delta", connected ? json(double(few_regen) / connected) : json(nullptr)},
                       {"fraction_large_above_gamma", connected ? json(double(many_large) / connected) : json(nullptr)}});
    }
  }
  std::string csv = "p,t_slope,length,connected,n_regen,n_large_increments,max_abs_partial_sum,confined_2d\n";
  for (const auto& r : rows)
    csv += fmt(c.p) + ',' + r.t_slope + ',' + fmt(r.length) + ',' + csv_bool(r.connected) + ',' +
           std::to_string(r.n_regen) + ',' + std::to_string(r.n_large) + ',' + fmt(r.max_abs_partial_sum) + ',' +
           csv_bool(r.confined) + '\n';
  out.write(mode_name(c.mode) + ".csv", csv);

  auto linear = [](const std::vector<double>& x, const std::vector<double>& y) -> json {
    try {
      return fit_json(least_squares(x, y));
    } catch (const DomainError& e) {
      return {{"error", e.what()}};
    }
  };

  // Exchangeability of (Delta_2, Delta_3) under the law conditioned on a
  // connection with at least 4 regeneration points.
  const int h = c.exchange_length / 2;
  const SlabSpec eslab({1, 0}, {-h, 0}, {c.exchange_length - h, 0});
  ConditionedSlabSampler sampler(c.exchange_length - h + 2, c.p, eslab, 4, derive_seed(c.seed, 0xe1));
  for (int i = 0; i < 10 * c.exchange_sweeps; ++i) sampler.sweep();
  std::vector<std::uint64_t> table(25, 0);
  std::size_t audit_fail[4] = {0, 0, 0, 0};
  double regen_total = 0;
  for (std::uint64_t i = 0; i < c.exchange_samples; ++i) {
    for (int k = 0; k < c.exchange_sweeps; ++k) sampler.sweep();
    const RenewalRecord& rec = sampler.record();
    ++table[delta_bin(rec.increments[1]) * 5 + delta_bin(rec.increments[2])];
    regen_total += rec.regen_points.size();
    const ExchangeAudit a = audit_exchange(sampler.config(), rec, 2);
    audit_fail[0] += !a.involution;
    audit_fail[1] += !a.open_count_preserved;
    audit_fail[2] += !a.regen_count_preserved;
    audit_fail[3] += !a.increments_swapped;
  }
  const SymmetryTest bowker = bowker_symmetry(table, 5);
  json grid = json::array();
  for (int i = 0; i < 5; ++i) grid.push_back(std::vector<std::uint64_t>(table.begin() + 5 * i, table.begin() + 5 * i + 5));

  json summary;
  summary["mode"] = mode_name(c.mode);
  summary["config"] = config_json(c);
  summary["cells"] = cells;
  summary["regen_vs_length"] = linear(len_x, regen_y);
  summary["large_increments_vs_length"] = linear(len_x, large_y);
  summary["select_q_checked"] = q_checked;
  summary["select_q_violations"] = q_violations;
  summary["tube_implication_violations"] = tube_violations;
  summary["exchange"] = {
      {"slab_length", c.exchange_length},
      {"samples", c.exchange_samples},
      {"sweeps_between_samples", c.exchange_sweeps},
      {"bins", "rows Delta_2, columns Delta_3: <= -2, -1, 0, 1, >= 2 (rounded)"},
      {"table", grid},
      {"bowker_statistic", bowker.statistic},
      {"bowker_df", bowker.df},
      {"bowker_p_value", bowker.p_value},
      {"mean_regen", c.exchange_samples ? regen_total / c.exchange_samples : 0.0},
      {"proposals", sampler.proposals()},
      {"rejections", sampler.rejections()},
      {"involution_failures", audit_fail[0]},
      {"open_count_failures", audit_fail[1]},
      {"regen_count_failures", audit_fail[2]},
      {"swap_failures", audit_fail[3]}};
  out.write_json(mode_name(c.mode) + "_summary.json", summary);
  log << "renewal-stats: " << rows.size() << " slabs, " << q_checked << " connected; exchangeability p = "
      << fmt(bowker.p_value) << " (df " << bowker.df << ")\n";
}

// ---- skeleton audit ----

void skeleton_audit(const ExperimentConfig& c, std::ostream& log, Output& out) {
  const TauNorm tau = resolve_tau(c).normalized();
  const int L = c.boxes.front();
  const std::uint64_t box_seed = derive_seed(c.seed, 0);
  const std::uint64_t cap = c.replicas * 10000;
  ExteriorWorkspace ws;
  std::string csv =
      "replica,l_eff,diam,diam_tau,level,s,m_plus_1,area_defect,hull_distance,functional_gap,long_side_sum,"
      "needed_k5,needed_k6,needed_k7,needed_k8,holds\n";
  std::uint64_t members = 0, r = 0;
  std::size_t violations[4] = {0, 0, 0, 0};
  std::size_t audits = 0, regular = 0, lemma_checked = 0, lemma_skipped = 0, lemma_violations = 0;
  double worst[4] = {0, 0, 0, 0};
  const SkeletonConstants& k = kSkeletonConstants;
  for (; members < c.replicas && r < cap; ++r) {
    const LazyBondField field(L, c.p, derive_seed(box_seed, r));
    const auto d = exterior_circuit(field, {0, 0}, ws);
    if (!d || d->boundary_contaminated || d->l_eff < c.min_l || !(d->l_eff > std::numbers::e)) continue;
    ++members;
    const ConvexHull hull = convex_hull(d->circuit);
    const Diameters dm = diameters(hull, tau);
    const bool is_regular = d->diameter < 8.0 * std::numbers::sqrt2 * d->l_eff;
    regular += is_regular;
    const ScaleParams sp = scale_params(d->l_eff, c.theta);
    for (int level = -1; level < 4; ++level) {
      const double s = level < 0 ? sp.s : dm.diam_tau / 2.0 / std::pow(2.0, level);
      if (level < 0 && dm.diam_tau < 2.0 * s) {
        ++lemma_skipped;
        continue;
      }
      const HullSkeleton skel = hull_skeleton(hull, s, tau);
      const SkeletonAudit a = audit_skeleton(d->circuit, skel, tau);
      const double need[4] = {a.needed_K5(), a.needed_K6(), a.needed_K7(), a.needed_K8()};
      for (int i = 0; i < 4; ++i) worst[i] = std::max(worst[i], need[i]);
      violations[0] += !(need[0] < k.K5);
      violations[1] += !(need[1] <= k.K6);
      violations[2] += !(need[2] <= k.K7);
      violations[3] += !(need[3] <= k.K8);
      ++audits;
      if (level < 0 && is_regular) {
        ++lemma_checked;
        lemma_violations += a.long_side_sum < std::sqrt(std::numbers::pi / 2.0) * d->l_eff;
      }
      csv += std::to_string(r) + ',' + fmt(d->l_eff) + ',' + fmt(d->diameter) + ',' + fmt(dm.diam_tau) + ',' +
             (level < 0 ? std::string("scale") : std::to_string(level)) + ',' + fmt(s) + ',' +
             std::to_string(a.point_count) + ',' + fmt(a.area_defect) + ',' + fmt(a.hull_distance) + ',' +
             fmt(a.functional_gap) + ',' + fmt(a.long_side_sum) + ',' + fmt(need[0]) + ',' + fmt(need[1]) + ',' +
             fmt(need[2]) + ',' + fmt(need[3]) + ',' + csv_bool(a.holds(k)) + '\n';
    }
  }
  if (members < c.replicas)
    throw DomainError("skeleton-audit: only " + std::to_string(members) + " qualifying droplets in " +
                      std::to_string(cap) + " replicas");
  out.write(mode_name(c.mode) + ".csv", csv);

  json summary;
  summary["mode"] = mode_name(c.mode);
  summary["config"] = config_json(c);
  summary["corpus_size"] = members;
  summary["replicas_scanned"] = r;
  summary["audits"] = audits;
  summary["constants"] = {{"K5", k.K5}, {"K6", k.K6}, {"K7", k.K7}, {"K8", k.K8}};
  summary["largest_needed"] = {{"K5", worst[0]}, {"K6", worst[1]}, {"K7", worst[2]}, {"K8", worst[3]}};
  summary["violations"] = {{"count", violations[0]}, {"area", violations[1]}, {"distance", violations[2]},
                           {"functional", violations[3]}};
  summary["l_regular_members"] = regular;
  summary["long_side_bound"] = {{"checked", lemma_checked},
                                {"skipped_scale_too_coarse", lemma_skipped},
                                {"violations", lemma_violations}};
  if (c.calibrate)
    summary["calibrated"] = {{"K5", 1.5 * worst[0]}, {"K6", 1.5 * worst[1]}, {"K7", 1.5 * worst[2]},
                             {"K8", 1.5 * worst[3]}};
  out.write_json(mode_name(c.mode) + "_summary.json", summary);
  log << "skeleton-audit: " << members << " droplets, " << audits << " skeletons, violations " << violations[0]
      << '/' << violations[1] << '/' << violations[2] << '/' << violations[3] << "; long-side bound "
      << lemma_violations << " of " << lemma_checked << '\n';
  if (c.calibrate)
    log << "calibrated constants: K5 " << fmt(1.5 * worst[0]) << ", K6 " << fmt(1.5 * worst[1]) << ", K7 "
        << fmt(1.5 * worst[2]) << ", K8 " << fmt(1.5 * worst[3]) << '\n';
}

}  // namespace

RunResult run(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  RunResult result;
  Output out(config, result);
  switch (config.mode) {
    case Mode::DropletScan: droplet_scan(config, log, out); break;
    case Mode::TauCalibrate: tau_calibration(config, log, out); break;
    case Mode::BridgeScan: bridge_scan(config, log, out); break;
    case Mode::RenewalStats: renewal_stats(config, log, out); break;
    case Mode::SkeletonAudit: skeleton_audit(config, log, out); break;
  }
  return result;
}

}  // namespace droplab
