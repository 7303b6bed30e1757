#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qbin {

/// One <uncertainty, localization error> observation. error is absent on
/// unlabeled inference records.
struct UncErrTuple {
  std::string id;
  double uncertainty = 0.0;
  std::optional<double> error;
};

/// Fitted quantile thresholds: alphas = [alpha_0 .. alpha_Q] with
/// alpha_0 = 0 and alpha_Q = +infinity.
struct QuantileThresholds {
  int q_bins = 0;
  std::vector<double> alphas;
  int fit_count = 0;
};

struct BinAssignment {
  std::string id;
  int bin = 0;  // 1-based
  double uncertainty = 0.0;
};

/// Sorts validation tuples by uncertainty and partitions them into Q
/// contiguous near-equal bins; alpha_q is the uncertainty of the first tuple
/// of bin q+1. Sizes differ by at most one, larger bins first.
QuantileThresholds fit_thresholds(std::span<const UncErrTuple> validation, int q_bins);

/// The unique q with alpha_{q-1} <= uncertainty < alpha_q.
int assign_bin(const QuantileThresholds& t, double uncertainty);

BinAssignment assign(const QuantileThresholds& t, const std::string& id, double uncertainty);

std::vector<int> bin_occupancy(std::span<const BinAssignment> assignments, int q_bins);

/// True when the validation set contains duplicate uncertainties, in which
/// case interval assignment may not reproduce the fitted partition.
bool has_tied_uncertainties(std::span<const UncErrTuple> validation);

// JSON form uses the string "inf" for alpha_Q.
nlohmann::json thresholds_to_json(const QuantileThresholds& t);
QuantileThresholds thresholds_from_json(const nlohmann::json& j);

}  // namespace qbin
