#pragma once

#include <span>

namespace qbin {

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 0.0;
};

/// Spearman rank correlation with average ranks for ties; p-value from the
/// t-distribution approximation t = rho * sqrt((n-2)/(1-rho^2)), two-sided.
SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y);

struct TTestResult {
  double t = 0.0;
  double p = 0.0;
  double df = 0.0;
  bool significant_at_0_05 = false;
};

/// Welch's two-sided t-test (unequal variances).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Standard paired two-sided t-test; throws on zero-variance differences.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

TTestResult significance_test(std::span<const double> a, std::span<const double> b, bool paired);

/// Average ranks (1-based) with ties sharing their mean rank.
void average_ranks(std::span<const double> values, std::span<double> out);

}  // namespace qbin
