#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "qbin/binning.hpp"

namespace qbin {

/// Monotone non-decreasing least-squares fit. Knots are strictly ascending in
/// x after duplicate-x merging; knot_weights carry the merged observation
/// weights.
struct IsotonicFit {
  std::vector<double> knots_x;
  std::vector<double> knots_y;
  std::vector<double> knot_weights;
};

/// Per-bin estimated error values gamma_0..gamma_Q evaluated at the quantile
/// thresholds. B_1's lower side and B_Q's upper side are open.
struct ErrorBounds {
  int q_bins = 0;
  std::vector<double> gammas;
};

/// Pool-adjacent-violators solution of the weighted monotone least-squares
/// problem.
IsotonicFit fit_isotonic(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weights = {});

/// Convenience overload over <uncertainty, error> tuples with unit weights.
IsotonicFit fit_isotonic(std::span<const UncErrTuple> observations);

/// Linear interpolation between knots, clamped outside the knot range; the
/// +infinity sentinel maps to the last fitted value.
double eval_isotonic(const IsotonicFit& fit, double x);

ErrorBounds estimate_bounds(const IsotonicFit& fit, const QuantileThresholds& thresholds);

nlohmann::json isotonic_to_json(const IsotonicFit& fit);
IsotonicFit isotonic_from_json(const nlohmann::json& j);

nlohmann::json bounds_to_json(const ErrorBounds& b);
ErrorBounds bounds_from_json(const nlohmann::json& j);

}  // namespace qbin
