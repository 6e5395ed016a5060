#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "droplab/errors.hpp"
#include "droplab/harness.hpp"

using namespace droplab;
namespace fs = std::filesystem;

namespace {

const std::string kData = std::string(DROPLAB_SOURCE_DIR) + "/data/";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("droplab_unit_" + name);
  fs::remove_all(d);
  return d;
}

ScanRow row(double l, double mlr, bool contaminated = false, double diam = -1) {
  ScanRow r;
  r.l_eff = l;
  r.mlr = mlr;
  r.alr = mlr / 2;
  r.diam = diam < 0 ? 2 * l : diam;
  r.contaminated = contaminated;
  r.confined = mlr < 1;
  return r;
}

ExperimentConfig small(Mode m, const fs::path& out) {
  ExperimentConfig c;
  c.mode = m;
  c.out = out.string();
  c.tau_file = kData + "tau_p055.json";
  c.seed = 7;
  switch (m) {
    case Mode::DropletScan:
      c.boxes = {16, 24};
      c.replicas = 300;
      c.min_l = 2;
      c.bootstrap = 50;
      break;
    case Mode::TauCalibrate:
      c.tau_file.clear();
      c.q_max = 2;
      c.tau_samples = 2000;
      break;
    case Mode::RenewalStats:
      c.lengths = {4, 6};
      c.replicas = 300;
      c.exchange_samples = 50;
      c.exchange_length = 8;
      c.exchange_sweeps = 1;
      break;
    case Mode::BridgeScan:
      c.scales = {4, 8, 16};
      c.replicas = 30;
      break;
    case Mode::SkeletonAudit:
      c.boxes = {32};
      c.replicas = 200;
      c.min_l = 3;
      break;
  }
  return c;
}

}  // namespace

TEST(Config, ModeNamesRoundTrip) {
  for (Mode m : {Mode::DropletScan, Mode::TauCalibrate, Mode::RenewalStats, Mode::BridgeScan, Mode::SkeletonAudit})
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_THROW(parse_mode("droplet_scan"), UsageError);
}

TEST(Config, WriteReadRoundTrip) {
  ExperimentConfig c;
  c.mode = Mode::BridgeScan;
  c.p = 0.65;
  c.boxes = {16, 32};
  c.scales = {3, 5.5, 9};
  c.lengths = {5, 7};
  c.calibrate = true;
  c.tau_file = "x.json";
  c.bin_ratio = 1.5;
  std::stringstream ss;
  write_config(ss, c);
  const auto back = read_config(ss);
  std::stringstream again;
  write_config(again, back);
  ss.clear();
  ss.seekg(0);
  EXPECT_EQ(again.str(), ss.str());
  EXPECT_EQ(back.boxes, c.boxes);
  EXPECT_EQ(back.scales, c.scales);
  EXPECT_EQ(back.mode, c.mode);
}

TEST(Config, CommentsAndBadLines) {
  std::stringstream ok("# header\n  p = 0.7   # trailing\n\nseed=3\n");
  const auto c = read_config(ok);
  EXPECT_EQ(c.p, 0.7);
  EXPECT_EQ(c.seed, 3u);
  std::stringstream bad("p 0.7\n");
  EXPECT_THROW(read_config(bad), UsageError);
  ExperimentConfig d;
  EXPECT_THROW(set_config_value(d, "nonsense", "1"), UsageError);
  EXPECT_THROW(set_config_value(d, "p", "half"), UsageError);
  EXPECT_THROW(set_config_value(d, "box", ""), UsageError);
  EXPECT_THROW(set_config_value(d, "calibrate", "maybe"), UsageError);
}

TEST(Config, ValidationNamesTheField) {
  ExperimentConfig c;
  EXPECT_NO_THROW(validate(c));
  auto fails = [](auto edit) {
    ExperimentConfig c;
    edit(c);
    EXPECT_THROW(validate(c), UsageError);
  };
  fails([](auto& c) { c.p = 0.5; });
  fails([](auto& c) { c.p = 1.0; });
  fails([](auto& c) { c.boxes = {2}; });
  fails([](auto& c) { c.theta = 1.0; });
  fails([](auto& c) { c.epsilon = 0.5; });
  fails([](auto& c) { c.scales = {4, 4, 8}; });
  fails([](auto& c) { c.threads = 0; });
  fails([](auto& c) {
    c.mode = Mode::BridgeScan;
    c.replicas = 29;
  });
}

TEST(Exponent, PureCubeRootGivesOneThird) {
  std::vector<std::pair<double, double>> pairs;
  for (double l : {10.0, 20.0, 40.0, 80.0, 160.0}) pairs.push_back({l, 2.5 * std::cbrt(l)});
  const auto f = fit_exponent(pairs, 0.0);
  EXPECT_NEAR(f.fit.slope, 1.0, 1e-12);
  EXPECT_NEAR(f.exponent, 1.0 / 3, 1e-12);
}

TEST(Exponent, LogCorrectedLawGivesSlopeOne) {
  std::vector<std::pair<double, double>> pairs;
  for (double l : {10.0, 30.0, 100.0, 300.0, 1000.0}) pairs.push_back({l, 0.4 * std::cbrt(l) * std::pow(std::log(l), 2.0 / 3)});
  EXPECT_NEAR(fit_exponent(pairs, 2.0 / 3).fit.slope, 1.0, 1e-12);
  // Without the log factor the same data looks steeper.
  EXPECT_GT(fit_exponent(pairs, 0.0).fit.slope, 1.2);
}

TEST(Exponent, DegenerateInputs) {
  const std::vector<std::pair<double, double>> flat{{10, 1}, {20, 1}, {40, 1}, {80, 1}};
  EXPECT_THROW(fit_exponent(flat, 0), DomainError);
  const std::vector<std::pair<double, double>> few{{10, 1}, {20, 2}, {40, 3}, {40, 4}};
  EXPECT_THROW(fit_exponent(few, 0), DomainError);
  const std::vector<std::pair<double, double>> neg{{10, 1}, {20, -2}, {40, 3}, {80, 4}};
  EXPECT_THROW(fit_exponent(neg, 0), DomainError);
  const std::vector<std::pair<double, double>> one{{1, 1}, {20, 2}, {40, 3}, {80, 4}};
  EXPECT_THROW(fit_exponent(one, 0), DomainError);
}

TEST(Binning, GeometricBinsAndFilters) {
  std::vector<ScanRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(row(8.5, 1.0));
  for (int i = 0; i < 6; ++i) rows.push_back(row(17.0, 3.0));
  rows.push_back(row(16.0, 2.0));
  rows.push_back(row(100.0, 5.0, true));
  rows.push_back(row(5.0, 5.0));
  rows.push_back(row(20.0, 5.0, false, 8 * std::sqrt(2.0) * 20.0));
  const auto b = condition_by_binning(rows, 8.0, 2.0, 100, 3);
  ASSERT_EQ(b.bins.size(), 2u);
  EXPECT_EQ(b.bins[0].count, 10u);
  EXPECT_DOUBLE_EQ(b.bins[0].l_low, 8.0);
  EXPECT_DOUBLE_EQ(b.bins[0].l_high, 16.0);
  EXPECT_DOUBLE_EQ(b.bins[0].mean_mlr, 1.0);
  EXPECT_EQ(b.bins[1].count, 7u);
  EXPECT_DOUBLE_EQ(b.bins[1].l_low, 16.0);
  EXPECT_DOUBLE_EQ(b.bins[1].median_mlr, 3.0);
  EXPECT_DOUBLE_EQ(b.bins[0].confined_fraction, 0.0);
  EXPECT_EQ(b.excluded.at("contaminated"), 1u);
  EXPECT_EQ(b.excluded.at("below min-l"), 1u);
  EXPECT_EQ(b.excluded.at("diam >= 8 sqrt(2) l_eff"), 1u);
  EXPECT_TRUE(b.notice.empty());
}

TEST(Binning, NothingSurvivesGivesNotice) {
  const auto b = condition_by_binning({row(3.0, 1.0), row(50.0, 1.0, true)}, 8.0, 1.5, 10, 1);
  EXPECT_TRUE(b.bins.empty());
  EXPECT_FALSE(b.notice.empty());
  EXPECT_TRUE(condition_by_binning({}, 8.0, 1.5, 10, 1).bins.empty());
}

TEST(Binning, PowerLawRecoveredFromSyntheticRows) {
  std::vector<ScanRow> rows;
  for (int i = 0; i < 4000; ++i) {
    const double l = 8.0 * std::pow(64.0, (i + 0.5) / 4000);
    rows.push_back(row(l, 0.7 * std::cbrt(l)));
  }
  const auto b = condition_by_binning(rows, 8.0, std::pow(2.0, 0.25), 0, 1);
  std::vector<std::pair<double, double>> pairs;
  for (const auto& bin : b.bins) pairs.push_back({bin.mean_l, bin.mean_mlr});
  EXPECT_NEAR(fit_exponent(pairs, 0).exponent, 1.0 / 3, 0.01);
}

TEST(Harness, ExitCodes) {
  EXPECT_EQ(exit_code_for(UsageError("x")), 2);
  EXPECT_EQ(exit_code_for(IoError("x")), 3);
  EXPECT_EQ(exit_code_for(DomainError("x")), 4);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}

TEST(Harness, EveryModeIsByteDeterministic) {
  for (Mode m : {Mode::DropletScan, Mode::TauCalibrate, Mode::RenewalStats, Mode::BridgeScan, Mode::SkeletonAudit}) {
    const auto a = scratch(mode_name(m) + "_a"), b = scratch(mode_name(m) + "_b");
    std::stringstream log;
    const auto ra = run(small(m, a), log);
    auto cb = small(m, b);
    cb.threads = 2;
    const auto rb = run(cb, log);
    ASSERT_EQ(ra.files.size(), rb.files.size()) << mode_name(m);
    ASSERT_FALSE(ra.files.empty());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
      EXPECT_EQ(fs::path(ra.files[i]).filename(), fs::path(rb.files[i]).filename());
      const auto x = slurp(ra.files[i]);
      EXPECT_FALSE(x.empty()) << ra.files[i];
      EXPECT_EQ(x, slurp(rb.files[i])) << ra.files[i];
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Harness, MissingTauFileIsAnIoError) {
  auto c = small(Mode::DropletScan, scratch("missing_tau"));
  c.tau_file = "/nonexistent/tau.json";
  std::stringstream log;
  try {
    run(c, log);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_EQ(exit_code_for(e), 3);
  }
}
