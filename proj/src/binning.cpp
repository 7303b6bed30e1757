#include "qbin/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbin {

QuantileThresholds fit_thresholds(std::span<const UncErrTuple> validation, int q_bins) {
  if (q_bins < 2) throw std::invalid_argument("fit_thresholds: Q must be >= 2");
  const int n = static_cast<int>(validation.size());
  if (n < q_bins) throw std::invalid_argument("fit_thresholds: need at least Q validation tuples");
  std::vector<double> sorted;
  sorted.reserve(validation.size());
  for (const auto& t : validation) {
    if (!std::isfinite(t.uncertainty) || t.uncertainty < 0.0)
      throw std::invalid_argument("fit_thresholds: uncertainties must be finite and non-negative");
    sorted.push_back(t.uncertainty);
  }
  std::stable_sort(sorted.begin(), sorted.end());

  QuantileThresholds out;
  out.q_bins = q_bins;
  out.fit_count = n;
  out.alphas.resize(static_cast<std::size_t>(q_bins) + 1);
  out.alphas.front() = 0.0;
  out.alphas.back() = std::numeric_limits<double>::infinity();
  const int base = n / q_bins;
  const int rem = n % q_bins;
  int start = 0;
  for (int q = 1; q < q_bins; ++q) {
    start += base + (q <= rem ? 1 : 0);
    out.alphas[static_cast<std::size_t>(q)] = sorted[static_cast<std::size_t>(start)];
  }
  return out;
}

int assign_bin(const QuantileThresholds& t, double uncertainty) {
  if (!std::isfinite(uncertainty) || uncertainty < 0.0)
    throw std::invalid_argument("assign_bin: uncertainty must be finite and non-negative");
  if (t.q_bins < 2 || t.alphas.size() != static_cast<std::size_t>(t.q_bins) + 1)
    throw std::invalid_argument("assign_bin: malformed thresholds");
  // interior thresholds alphas[1..Q-1]; bin = 1 + count of thresholds <= u
  auto first = t.alphas.begin() + 1;
  auto last = t.alphas.end() - 1;
  return 1 + static_cast<int>(std::upper_bound(first, last, uncertainty) - first);
}

BinAssignment assign(const QuantileThresholds& t, const std::string& id, double uncertainty) {
  return {id, assign_bin(t, uncertainty), uncertainty};
}

std::vector<int> bin_occupancy(std::span<const BinAssignment> assignments, int q_bins) {
  if (q_bins < 1) throw std::invalid_argument("bin_occupancy: Q must be positive");
  std::vector<int> counts(static_cast<std::size_t>(q_bins), 0);
  for (const auto& a : assignments) {
    if (a.bin < 1 || a.bin > q_bins) throw std::invalid_argument("bin_occupancy: bin out of range");
    ++counts[static_cast<std::size_t>(a.bin - 1)];
  }
  return counts;
}

bool has_tied_uncertainties(std::span<const UncErrTuple> validation) {
  std::vector<double> u;
  u.reserve(validation.size());
  for (const auto& t : validation) u.push_back(t.uncertainty);
  std::sort(u.begin(), u.end());
  return std::adjacent_find(u.begin(), u.end()) != u.end();
}

nlohmann::json thresholds_to_json(const QuantileThresholds& t) {
  nlohmann::json alphas = nlohmann::json::array();
  for (std::size_t i = 0; i < t.alphas.size(); ++i) {
    if (std::isinf(t.alphas[i]))
      alphas.push_back("inf");
    else
      alphas.push_back(t.alphas[i]);
  }
  return {{"q", t.q_bins}, {"alphas", alphas}, {"fit_count", t.fit_count}};
}

QuantileThresholds thresholds_from_json(const nlohmann::json& j) {
  QuantileThresholds t;
  t.q_bins = j.at("q").get<int>();
  t.fit_count = j.at("fit_count").get<int>();
  for (const auto& a : j.at("alphas")) {
    if (a.is_string()) {
      if (a.get<std::string>() != "inf")
        throw std::runtime_error("thresholds JSON: unexpected alpha string");
      t.alphas.push_back(std::numeric_limits<double>::infinity());
    } else {
      t.alphas.push_back(a.get<double>());
    }
  }
  if (t.alphas.size() != static_cast<std::size_t>(t.q_bins) + 1)
    throw std::runtime_error("thresholds JSON: alpha count does not match Q");
  return t;
}

}  // namespace qbin
