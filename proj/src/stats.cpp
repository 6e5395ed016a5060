#include "droplab/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "droplab/errors.hpp"
#include "droplab/rng.hpp"

namespace droplab {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw DomainError("least_squares: length mismatch");
  if (n < 3) throw DomainError("least_squares: need at least 3 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("least_squares: constant regressor");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
  f.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  const boost::math::students_t t(static_cast<double>(n - 2));
  const double q = boost::math::quantile(boost::math::complement(t, 0.025));
  f.ci_low = f.slope - q * f.slope_stderr;
  f.ci_high = f.slope + q * f.slope_stderr;
  return f;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double a : v) s += a;
  return s / v.size();
}

double standard_error(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double a : v) s += (a - m) * (a - m);
  return std::sqrt(s / (n - 1) / n);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  const double hi = v[h];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + h));
}

Interval bootstrap_ci(std::span<const double> v, std::size_t resamples, std::uint64_t seed, double level,
                      bool use_median) {
  if (v.empty()) return {};
  SplitMix64 rng(seed);
  std::vector<double> stats, draw(v.size());
  stats.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& d : draw) d = v[rng.below(v.size())];
    stats.push_back(use_median ? median(draw) : mean(draw));
  }
  std::sort(stats.begin(), stats.end());
  const double a = 0.5 * (1.0 - level);
  auto pick = [&](double q) {
    const auto i = static_cast<std::size_t>(std::floor(q * (stats.size() - 1) + 0.5));
    return stats[std::min(i, stats.size() - 1)];
  };
  return {pick(a), pick(1.0 - a)};
}

double chi_square_survival(double x, double df) {
  if (df <= 0) return 1.0;
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, x)));
}

SymmetryTest bowker_symmetry(const std::vector<std::uint64_t>& table, std::size_t k) {
  if (table.size() != k * k) throw DomainError("bowker_symmetry: table is not k x k");
  SymmetryTest t;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double a = static_cast<double>(table[i * k + j]);
      const double b = static_cast<double>(table[j * k + i]);
      if (a + b == 0) continue;
      t.statistic += (a - b) * (a - b) / (a + b);
      ++t.df;
    }
  t.p_value = chi_square_survival(t.statistic, static_cast<double>(t.df));
  return t;
}

}  // namespace droplab
