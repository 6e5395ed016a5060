#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "droplab/skeleton_constants.hpp"
#include "droplab/stats.hpp"
#include "droplab/tau.hpp"

namespace droplab {

enum class Mode { DropletScan, TauCalibrate, RenewalStats, BridgeScan, SkeletonAudit };

std::string mode_name(Mode m);
/// Throws UsageError for an unknown name.
Mode parse_mode(const std::string& name);

struct ExperimentConfig {
  Mode mode = Mode::DropletScan;
  double p = 0.55;
  std::vector<int> boxes{128};
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 1;
  double theta = 0.1;
  double lambda = 0.2;
  double epsilon = 0.25;
  double delta = 0.05;
  double gamma = 0.02;
  double min_l = 8.0;
  std::string out = ".";

  std::string tau_file;                 ///< empty: calibrate at p on the fly
  std::uint64_t tau_samples = 1000000;  ///< samples for tau-calibrate / on-the-fly tau
  int q_max = 6;
  std::vector<double> scales{64, 128, 256, 512, 1024, 2048, 4096};  ///< bridge l list
  std::vector<int> lengths{8, 16, 24, 32, 48, 64};                  ///< renewal slab lengths
  double bin_ratio = 1.189207115002721;  ///< 2^{1/4}
  std::uint64_t min_bin_count = 200;
  std::uint64_t bootstrap = 1000;
  int exchange_length = 12;
  int exchange_sweeps = 4;
  std::uint64_t exchange_samples = 10000;
  bool calibrate = false;
  unsigned threads = 1;
};

/// Throws UsageError naming the first field outside its domain.
void validate(const ExperimentConfig& c);

/// Plain "key = value" lines, '#' comments; keys are the long flag names.
void write_config(std::ostream& out, const ExperimentConfig& c);
/// Applies the entries of `in` on top of `base`. Throws UsageError.
ExperimentConfig read_config(std::istream& in, ExperimentConfig base = {});
/// Applies one key/value pair. Throws UsageError for unknown keys or bad values.
void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value);

struct ScanRow {
  int box = 0;
  std::uint64_t replica = 0;
  std::uint64_t seed = 0;
  double l_eff = 0.0;
  double area = 0.0;
  double diam = 0.0;
  double alr = 0.0;
  double mlr = 0.0;
  std::size_t m_plus_1 = 0;
  std::size_t n_long_sides = 0;
  bool confined = false;
  bool contaminated = false;
};

struct Bin {
  double l_low = 0.0;
  double l_high = 0.0;
  std::size_t count = 0;
  double mean_l = 0.0;
  double mean_alr = 0.0;
  double mean_mlr = 0.0;
  double median_alr = 0.0;
  double median_mlr = 0.0;
  Interval alr_ci;
  Interval mlr_ci;
  double confined_fraction = 0.0;
};

struct BinnedStats {
  std::vector<Bin> bins;
  std::map<std::string, std::size_t> excluded;  ///< reason -> rows
  std::string notice;                           ///< set when nothing survives
};

/// Geometric bins [min_l r^j, min_l r^{j+1}) over rows that pass the
/// regularity filter (not contaminated, diam < 8 sqrt(2) l_eff, l_eff >= min_l).
/// Empty bins are omitted. Bootstrap intervals are seeded from `seed`.
BinnedStats condition_by_binning(const std::vector<ScanRow>& rows, double min_l, double ratio,
                                 std::uint64_t bootstrap, std::uint64_t seed);

struct ExponentFit {
  LinearFit fit;          ///< log value against log(l^{1/3} (log l)^c)
  double exponent = 0.0;  ///< slope / 3, the power of l
  double exponent_low = 0.0;
  double exponent_high = 0.0;
};

/// Throws DomainError for fewer than 4 distinct l values, l <= 1 or
/// non-positive values, and for constant values.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& pairs, double log_power);

struct RunResult {
  std::vector<std::string> files;  ///< written paths, in order
};

/// Executes the configured mode and writes `<mode>.csv` and
/// `<mode>_summary.json` (plus `tau.json` for tau-calibrate) into `out`.
/// Throws UsageError, IoError or DomainError.
RunResult run(const ExperimentConfig& config, std::ostream& log);

/// Exit status for the exception classes (0 ok, 2 usage, 3 I/O, 4 numeric domain).
int exit_code_for(const std::exception& e);

/// Tau used by a run: the file when given, else a fresh calibration at p.
TauNorm resolve_tau(const ExperimentConfig& c);

}  // namespace droplab
