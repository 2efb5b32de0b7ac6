#pragma once

#include <span>

namespace rlsched {

double mean(std::span<const double> xs);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> xs);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;  // two-sided
  // p fell below the smallest positive double and is reported as 0.
  bool p_underflow = false;
};

// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
// Throws StatisticsError for samples smaller than two or when both samples
// have zero variance.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

}  // namespace rlsched
