#include <gtest/gtest.h>

#include <cmath>

#include "droplab/errors.hpp"
#include "droplab/rng.hpp"
#include "droplab/stats.hpp"

using namespace droplab;

TEST(Stats, ExactLineFits) {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
  const auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-12);
  EXPECT_EQ(f.n, 5u);
}

TEST(Stats, HandWorkedRegression) {
  // x = 1..4, y = 1,3,2,5: slope 1.1, intercept 0, rss 2.7
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 5};
  const auto f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 1.1, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-12);
  EXPECT_NEAR(f.slope_stderr, std::sqrt(2.7 / 2 / 5), 1e-12);
  EXPECT_NEAR(f.r_squared, 1 - 2.7 / 8.75, 1e-12);
  // t quantile with 2 df at 0.975 is 4.302653
  EXPECT_NEAR(f.ci_high - f.slope, 4.302653 * f.slope_stderr, 1e-5);
  EXPECT_NEAR(f.slope - f.ci_low, f.ci_high - f.slope, 1e-12);
}

TEST(Stats, RegressionRejectsDegenerateInput) {
  const std::vector<double> two{1, 2}, c{3, 3, 3}, y3{1, 2, 3};
  EXPECT_THROW(least_squares(two, two), DomainError);
  EXPECT_THROW(least_squares(c, y3), DomainError);
  EXPECT_THROW(least_squares(y3, two), DomainError);
}

TEST(Stats, MeanErrorAndMedian) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_NEAR(standard_error(v), std::sqrt(5.0 / 3 / 4), 1e-12);
  EXPECT_DOUBLE_EQ(median(v), 2.5);
  EXPECT_DOUBLE_EQ(median({5, 1, 9}), 5.0);
  EXPECT_EQ(median({}), 0.0);
  EXPECT_EQ(standard_error(std::vector<double>{1.0}), 0.0);
}

TEST(Stats, BootstrapCoversTheMean) {
  SplitMix64 g(8);
  int covered = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v(60);
    for (auto& a : v) a = 2.0 + g.normal();
    const auto ci = bootstrap_ci(v, 500, t);
    EXPECT_LE(ci.low, mean(v));
    EXPECT_GE(ci.high, mean(v));
    if (ci.low <= 2.0 && 2.0 <= ci.high) ++covered;
  }
  EXPECT_NEAR(covered / double(trials), 0.95, 0.04);
}

TEST(Stats, BootstrapIsSeeded) {
  const std::vector<double> v{1, 5, 2, 8, 3, 3, 9};
  const auto a = bootstrap_ci(v, 300, 4), b = bootstrap_ci(v, 300, 4);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
  const auto m = bootstrap_ci(v, 300, 4, 0.9, true);
  EXPECT_LE(m.low, m.high);
  const std::vector<double> flat(10, 7.0);
  const auto f = bootstrap_ci(flat, 100, 1);
  EXPECT_EQ(f.low, 7.0);
  EXPECT_EQ(f.high, 7.0);
}

TEST(Stats, ChiSquareTailClosedForms) {
  for (double x : {0.1, 1.0, 3.84, 10.0}) {
    EXPECT_NEAR(chi_square_survival(x, 2), std::exp(-x / 2), 1e-12);
    EXPECT_NEAR(chi_square_survival(x, 1), std::erfc(std::sqrt(x / 2)), 1e-12);
    EXPECT_NEAR(chi_square_survival(x, 4), std::exp(-x / 2) * (1 + x / 2), 1e-12);
  }
  EXPECT_EQ(chi_square_survival(5, 0), 1.0);
  EXPECT_EQ(chi_square_survival(-1, 3), 1.0);
}

TEST(Stats, BowkerByHand) {
  // off-diagonal pairs (1,2)=(10,4), (1,3)=(0,0), (2,3)=(3,5)
  const std::vector<std::uint64_t> t{7, 10, 0, 4, 2, 3, 0, 5, 9};
  const auto r = bowker_symmetry(t, 3);
  EXPECT_EQ(r.df, 2u);
  EXPECT_NEAR(r.statistic, 36.0 / 14 + 4.0 / 8, 1e-12);
  EXPECT_NEAR(r.p_value, std::exp(-r.statistic / 2), 1e-12);
  const std::vector<std::uint64_t> sym{1, 4, 4, 1};
  EXPECT_EQ(bowker_symmetry(sym, 2).statistic, 0.0);
  EXPECT_EQ(bowker_symmetry(sym, 2).p_value, 1.0);
  EXPECT_THROW(bowker_symmetry(sym, 3), DomainError);
}

TEST(Stats, BowkerUnderTheNullIsCalibrated) {
  SplitMix64 g(12);
  int rejected = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint64_t> tab(16, 0);
    for (int i = 0; i < 400; ++i) {
      const auto a = g.below(4), b = g.below(4);
      ++tab[a * 4 + b];
    }
    if (bowker_symmetry(tab, 4).p_value < 0.05) ++rejected;
  }
  EXPECT_NEAR(rejected / double(trials), 0.05, 0.015);
}
