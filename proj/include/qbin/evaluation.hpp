#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbin/binning.hpp"
#include "qbin/isotonic.hpp"

namespace qbin {

/// Test-set ids partitioned into Q near-equal bins by ascending true error.
struct GroundTruthBins {
  int q_bins = 0;
  std::vector<std::vector<std::string>> members;
};

GroundTruthBins ground_truth_bins(std::span<const UncErrTuple> test, int q_bins);

/// J_q = |B_q intersect GT_q| / |B_q union GT_q|; 1.0 when both empty.
/// Both partitions must cover the same id universe.
std::vector<double> jaccard_per_bin(const std::vector<std::vector<std::string>>& predicted,
                                    const GroundTruthBins& truth);

/// A binned test prediction with its known error.
struct AssignedError {
  std::string id;
  int bin = 0;
  double uncertainty = 0.0;
  double error = 0.0;
  int fold = 0;
};

/// Per-bin fraction of members inside [gamma_{q-1}, gamma_q); B_1 checks only
/// the upper bound, B_Q only the lower. Empty bins report NaN.
std::vector<double> bound_accuracy_per_bin(std::span<const AssignedError> assignments,
                                           const ErrorBounds& bounds);

/// Fraction of errors <= each threshold.
std::vector<double> cumulative_error_curve(std::span<const double> errors,
                                           std::span<const double> thresholds);

struct FoldMetrics {
  int fold = 0;
  std::vector<double> jaccard;
  std::vector<double> bound_accuracy;  // NaN for empty bins
  std::vector<double> bin_mean_error;  // NaN for empty bins
  std::vector<int> bin_count;
};

/// Metrics of a single (landmark, fold) evaluation unit.
FoldMetrics compute_fold_metrics(int fold, std::span<const AssignedError> assignments,
                                 const ErrorBounds& bounds, int q_bins);

struct CdfSeries {
  std::vector<double> thresholds;
  std::vector<double> all_fraction;
  std::vector<double> b1_fraction;
};

struct SignificanceEntry {
  std::string label;
  double t = 0.0;
  double p = 0.0;
  bool significant = false;
};

struct EvaluationReport {
  int q_bins = 0;
  std::vector<FoldMetrics> folds;
  // Cross-fold unweighted means / sample standard deviations per bin,
  // NaN fold entries excluded.
  std::vector<double> mean_jaccard, sd_jaccard;
  std::vector<double> mean_bound_accuracy, sd_bound_accuracy;
  std::vector<double> mean_bin_error, sd_bin_error;
  std::vector<double> mean_bin_count;
  // Pooled error statistics.
  double all_mean_error = 0.0, all_sd_error = 0.0;
  double b1_mean_error = 0.0, b1_sd_error = 0.0;
  double spearman_rho_value = 0.0, spearman_p = 0.0;
  CdfSeries cdf;
  std::vector<SignificanceEntry> significance;
};

struct AggregateOptions {
  int q_bins = 5;
  std::vector<double> cdf_thresholds;  // defaults to 1..10, 15, 20 mm
  bool pooled_correlation = true;      // false: per-fold rho, then averaged
};

/// Cross-fold aggregation plus pooled correlation, CDF and significance tests
/// computed from the pooled assignments.
EvaluationReport aggregate_folds(std::span<const FoldMetrics> per_fold,
                                 std::span<const AssignedError> pooled,
                                 const AggregateOptions& options);

nlohmann::json report_to_json(const EvaluationReport& report);

}  // namespace qbin
