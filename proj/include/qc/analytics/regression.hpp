#pragma once

#include <cstddef>
#include <span>

namespace qc {

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
  double r_squared = 0.0;
  // Test statistic for slope != 0; +/-infinity when |r| = 1.
  double t_stat = 0.0;
  // Two-sided, Student t with n - 2 degrees of freedom.
  double p_value = 1.0;
  std::size_t n = 0;

  bool perfect_fit() const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

// Least-squares line through n >= 2 points (no inference). Throws
// insufficient-data below two points and degenerate-predictor when x is
// constant.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Ordinary least squares y = slope * x + intercept.
//
// Throws insufficient-data when n < 3 (or the lengths differ) and
// degenerate-predictor when x has zero variance. A constant y gives slope 0,
// r 0 and p 1.
RegressionResult ols(std::span<const double> x, std::span<const double> y);

}  // namespace qc
