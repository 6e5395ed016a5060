#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace droplab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_low = 0.0;   ///< 95% (Student t)
  double ci_high = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = a + b x. Throws DomainError for fewer than
/// 3 points or constant x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Sample standard deviation / sqrt(n).
double standard_error(std::span<const double> v);
double median(std::vector<double> v);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap interval of the mean (or median), seeded.
Interval bootstrap_ci(std::span<const double> v, std::size_t resamples, std::uint64_t seed,
                      double level = 0.95, bool use_median = false);

struct SymmetryTest {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

/// Bowker's test of symmetry for a square contingency table (row-major k x k):
/// sum over i < j with n_ij + n_ji > 0 of (n_ij - n_ji)^2 / (n_ij + n_ji).
SymmetryTest bowker_symmetry(const std::vector<std::uint64_t>& table, std::size_t k);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double x, double df);

}  // namespace droplab
