#include "qc/analytics/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qc/analytics/stats.hpp"
#include "qc/error.hpp"

namespace qc {

bool RegressionResult::perfect_fit() const { return std::isinf(t_stat); }

namespace {

struct Moments {
  double mx = 0.0;
  double my = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

Moments centered_moments(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double nn = static_cast<double>(n);
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.mx += x[i];
    m.my += y[i];
  }
  m.mx /= nn;
  m.my /= nn;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - m.mx;
    const double dy = y[i] - m.my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  if (!(m.sxx > 0.0)) throw Error(ErrorCode::degenerate_predictor, "predictor has zero variance");
  return m;
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::insufficient_data, "x and y differ in length");
  if (x.size() < 2) throw Error(ErrorCode::insufficient_data, "a line needs at least 2 points");
  const auto m = centered_moments(x, y);
  LineFit fit;
  fit.n = x.size();
  fit.slope = m.sxy / m.sxx;
  fit.intercept = m.my - fit.slope * m.mx;
  fit.r_squared = m.syy > 0.0 ? std::min(1.0, m.sxy * m.sxy / (m.sxx * m.syy)) : 0.0;
  return fit;
}

RegressionResult ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::insufficient_data, "x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::insufficient_data, "regression needs at least 3 points");

  const double nn = static_cast<double>(n);
  const auto [mx, my, sxx, syy, sxy] = centered_moments(x, y);

  RegressionResult res;
  res.n = n;
  res.slope = sxy / sxx;
  res.intercept = my - res.slope * mx;
  if (!(syy > 0.0)) {
    res.r = 0.0;
    res.r_squared = 0.0;
    res.t_stat = 0.0;
    res.p_value = 1.0;
    return res;
  }
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double one_minus_r2 = 1.0 - res.r * res.r;
  const double df = nn - 2.0;
  // Rounding leaves |r| a few ulps short of 1 on exactly collinear data.
  if (one_minus_r2 <= 8.0 * std::numeric_limits<double>::epsilon()) {
    res.r = std::copysign(1.0, res.r);
    res.r_squared = 1.0;
    res.t_stat = std::copysign(std::numeric_limits<double>::infinity(), res.r);
    res.p_value = 0.0;
    return res;
  }
  res.r_squared = res.r * res.r;
  res.t_stat = res.r * std::sqrt(df / one_minus_r2);
  res.p_value = stats::student_t_two_sided_p(res.t_stat, df);
  return res;
}

}  // namespace qc
