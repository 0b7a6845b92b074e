#pragma once

#include <span>
#include <vector>

namespace qc::stats {

// Median of a non-empty sample; the mean of the two middle values for even n.
// The argument is reordered.
double median_inplace(std::vector<double>& values);
double median(std::span<const double> values);

// Median absolute deviation about the median (unscaled).
double mad(std::span<const double> values, double center);

double mean(std::span<const double> values);

// Consistency constant: 1.4826 * MAD estimates sigma for Gaussian data.
inline constexpr double kMadToSigma = 1.4826;

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace qc::stats
