#include "qbin/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "qbin/stats.hpp"

namespace qbin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_skip_nan(std::span<const double> v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      sum += x;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : kNaN;
}

double sd_skip_nan(std::span<const double> v, double mean) {
  double ss = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      ss += (x - mean) * (x - mean);
      ++n;
    }
  return n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : kNaN;
}

void pooled_stats(std::span<const double> v, double& mean, double& sd) {
  if (v.empty()) {
    mean = sd = kNaN;
    return;
  }
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

nlohmann::json json_array(std::span<const double> v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

}  // namespace

GroundTruthBins ground_truth_bins(std::span<const UncErrTuple> test, int q_bins) {
  if (q_bins < 2) throw std::invalid_argument("ground_truth_bins: Q must be >= 2");
  const int n = static_cast<int>(test.size());
  if (n < q_bins) throw std::invalid_argument("ground_truth_bins: need at least Q tuples");
  std::vector<std::size_t> order(test.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& t : test)
    if (!t.error) throw std::invalid_argument("ground_truth_bins: tuple lacks a ground-truth error");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return *test[a].error < *test[b].error; });

  GroundTruthBins out;
  out.q_bins = q_bins;
  out.members.resize(static_cast<std::size_t>(q_bins));
  const int base = n / q_bins;
  const int rem = n % q_bins;
  std::size_t idx = 0;
  for (int q = 0; q < q_bins; ++q) {
    const int size = base + (q < rem ? 1 : 0);
    for (int k = 0; k < size; ++k) out.members[static_cast<std::size_t>(q)].push_back(test[order[idx++]].id);
  }
  return out;
}

std::vector<double> jaccard_per_bin(const std::vector<std::vector<std::string>>& predicted,
                                    const GroundTruthBins& truth) {
  if (static_cast<int>(predicted.size()) != truth.q_bins)
    throw std::invalid_argument("jaccard_per_bin: bin count mismatch");
  std::unordered_set<std::string> pred_ids, truth_ids;
  for (const auto& bin : predicted) pred_ids.insert(bin.begin(), bin.end());
  for (const auto& bin : truth.members) truth_ids.insert(bin.begin(), bin.end());
  if (pred_ids != truth_ids)
    throw std::invalid_argument("jaccard_per_bin: id universes differ");

  std::vector<double> out;
  out.reserve(predicted.size());
  for (std::size_t q = 0; q < predicted.size(); ++q) {
    std::unordered_set<std::string> a(predicted[q].begin(), predicted[q].end());
    const auto& b = truth.members[q];
    if (a.empty() && b.empty()) {
      out.push_back(1.0);
      continue;
    }
    std::size_t inter = 0;
    for (const auto& id : b) inter += a.count(id);
    const std::size_t uni = a.size() + b.size() - inter;
    out.push_back(static_cast<double>(inter) / static_cast<double>(uni));
  }
  return out;
}

std::vector<double> bound_accuracy_per_bin(std::span<const AssignedError> assignments,
                                           const ErrorBounds& bounds) {
  const int q_bins = bounds.q_bins;
  if (q_bins < 2 || bounds.gammas.size() != static_cast<std::size_t>(q_bins) + 1)
    throw std::invalid_argument("bound_accuracy_per_bin: malformed bounds");
  std::vector<int> hits(static_cast<std::size_t>(q_bins), 0);
  std::vector<int> counts(static_cast<std::size_t>(q_bins), 0);
  for (const auto& a : assignments) {
    if (a.bin < 1 || a.bin > q_bins)
      throw std::invalid_argument("bound_accuracy_per_bin: bin out of range");
    const std::size_t q = static_cast<std::size_t>(a.bin - 1);
    ++counts[q];
    const double lo = bounds.gammas[q];
    const double hi = bounds.gammas[q + 1];
    bool ok;
    if (a.bin == 1)
      ok = a.error < hi;  // lower side open
    else if (a.bin == q_bins)
      ok = a.error >= lo;  // upper side open
    else
      ok = a.error >= lo && a.error < hi;
    if (ok) ++hits[q];
  }
  std::vector<double> out(static_cast<std::size_t>(q_bins), kNaN);
  for (int q = 0; q < q_bins; ++q)
    if (counts[static_cast<std::size_t>(q)] > 0)
      out[static_cast<std::size_t>(q)] = static_cast<double>(hits[static_cast<std::size_t>(q)]) /
                                         static_cast<double>(counts[static_cast<std::size_t>(q)]);
  return out;
}

std::vector<double> cumulative_error_curve(std::span<const double> errors,
                                           std::span<const double> thresholds) {
  for (double e : errors)
    if (!(e >= 0.0)) throw std::invalid_argument("cumulative_error_curve: errors must be non-negative");
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    if (errors.empty()) {
      out.push_back(0.0);
      continue;
    }
    std::size_t n = 0;
    for (double e : errors)
      if (e <= t) ++n;
    out.push_back(static_cast<double>(n) / static_cast<double>(errors.size()));
  }
  return out;
}

FoldMetrics compute_fold_metrics(int fold, std::span<const AssignedError> assignments,
                                 const ErrorBounds& bounds, int q_bins) {
  FoldMetrics m;
  m.fold = fold;
  m.bound_accuracy = bound_accuracy_per_bin(assignments, bounds);

  std::vector<std::vector<std::string>> predicted(static_cast<std::size_t>(q_bins));
  std::vector<UncErrTuple> tuples;
  tuples.reserve(assignments.size());
  m.bin_count.assign(static_cast<std::size_t>(q_bins), 0);
  std::vector<double> sums(static_cast<std::size_t>(q_bins), 0.0);
  for (const auto& a : assignments) {
    predicted[static_cast<std::size_t>(a.bin - 1)].push_back(a.id);
    tuples.push_back({a.id, a.uncertainty, a.error});
    ++m.bin_count[static_cast<std::size_t>(a.bin - 1)];
    sums[static_cast<std::size_t>(a.bin - 1)] += a.error;
  }
  m.jaccard = jaccard_per_bin(predicted, ground_truth_bins(tuples, q_bins));
  m.bin_mean_error.assign(static_cast<std::size_t>(q_bins), kNaN);
  for (int q = 0; q < q_bins; ++q)
    if (m.bin_count[static_cast<std::size_t>(q)] > 0)
      m.bin_mean_error[static_cast<std::size_t>(q)] =
          sums[static_cast<std::size_t>(q)] / m.bin_count[static_cast<std::size_t>(q)];
  return m;
}

EvaluationReport aggregate_folds(std::span<const FoldMetrics> per_fold,
                                 std::span<const AssignedError> pooled,
                                 const AggregateOptions& options) {
  if (per_fold.empty()) throw std::invalid_argument("aggregate_folds: need at least one fold");
  const int q_bins = options.q_bins;
  for (const auto& f : per_fold)
    if (static_cast<int>(f.jaccard.size()) != q_bins)
      throw std::invalid_argument("aggregate_folds: inconsistent Q across folds");

  EvaluationReport rep;
  rep.q_bins = q_bins;
  rep.folds.assign(per_fold.begin(), per_fold.end());

  auto collect = [&](auto getter, std::vector<double>& mean_out, std::vector<double>& sd_out) {
    mean_out.resize(static_cast<std::size_t>(q_bins));
    sd_out.resize(static_cast<std::size_t>(q_bins));
    for (int q = 0; q < q_bins; ++q) {
      std::vector<double> vals;
      vals.reserve(per_fold.size());
      for (const auto& f : per_fold) vals.push_back(getter(f)[static_cast<std::size_t>(q)]);
      mean_out[static_cast<std::size_t>(q)] = mean_skip_nan(vals);
      sd_out[static_cast<std::size_t>(q)] = sd_skip_nan(vals, mean_out[static_cast<std::size_t>(q)]);
    }
  };
  collect([](const FoldMetrics& f) -> const std::vector<double>& { return f.jaccard; },
          rep.mean_jaccard, rep.sd_jaccard);
  collect([](const FoldMetrics& f) -> const std::vector<double>& { return f.bound_accuracy; },
          rep.mean_bound_accuracy, rep.sd_bound_accuracy);
  collect([](const FoldMetrics& f) -> const std::vector<double>& { return f.bin_mean_error; },
          rep.mean_bin_error, rep.sd_bin_error);
  rep.mean_bin_count.resize(static_cast<std::size_t>(q_bins));
  for (int q = 0; q < q_bins; ++q) {
    double sum = 0.0;
    for (const auto& f : per_fold) sum += f.bin_count[static_cast<std::size_t>(q)];
    rep.mean_bin_count[static_cast<std::size_t>(q)] = sum / static_cast<double>(per_fold.size());
  }

  std::vector<double> all_errors, b1_errors;
  for (const auto& a : pooled) {
    all_errors.push_back(a.error);
    if (a.bin == 1) b1_errors.push_back(a.error);
  }
  pooled_stats(all_errors, rep.all_mean_error, rep.all_sd_error);
  pooled_stats(b1_errors, rep.b1_mean_error, rep.b1_sd_error);

  // Correlation: pooled across folds, or per fold then averaged.
  if (options.pooled_correlation) {
    std::vector<double> unc;
    unc.reserve(pooled.size());
    for (const auto& a : pooled) unc.push_back(a.uncertainty);
    if (unc.size() >= 3) {
      try {
        auto sp = spearman_rho(unc, all_errors);
        rep.spearman_rho_value = sp.rho;
        rep.spearman_p = sp.p_value;
      } catch (const std::invalid_argument&) {
        rep.spearman_rho_value = kNaN;
        rep.spearman_p = kNaN;
      }
    } else {
      rep.spearman_rho_value = kNaN;
      rep.spearman_p = kNaN;
    }
  } else {
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_fold;
    for (const auto& a : pooled) {
      by_fold[a.fold].first.push_back(a.uncertainty);
      by_fold[a.fold].second.push_back(a.error);
    }
    std::vector<double> rhos, ps;
    for (const auto& [fold, uv] : by_fold) {
      if (uv.first.size() < 3) continue;
      try {
        auto sp = spearman_rho(uv.first, uv.second);
        rhos.push_back(sp.rho);
        ps.push_back(sp.p_value);
      } catch (const std::invalid_argument&) {
      }
    }
    rep.spearman_rho_value = mean_skip_nan(rhos);
    rep.spearman_p = mean_skip_nan(ps);
  }

  CdfSeries cdf;
  cdf.thresholds = options.cdf_thresholds;
  if (cdf.thresholds.empty()) cdf.thresholds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20};
  cdf.all_fraction = cumulative_error_curve(all_errors, cdf.thresholds);
  cdf.b1_fraction = cumulative_error_curve(b1_errors, cdf.thresholds);
  rep.cdf = std::move(cdf);

  // Edge bins vs interior bins, on pooled errors.
  std::vector<double> bq_errors, interior_errors;
  for (const auto& a : pooled) {
    if (a.bin == q_bins)
      bq_errors.push_back(a.error);
    else if (a.bin > 1)
      interior_errors.push_back(a.error);
  }
  auto add_test = [&](const std::string& label, std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) return;
    try {
      auto r = welch_t_test(a, b);
      rep.significance.push_back({label, r.t, r.p, r.significant_at_0_05});
    } catch (const std::invalid_argument&) {
    }
  };
  add_test("b1_vs_interior", b1_errors, interior_errors);
  add_test("bq_vs_interior", bq_errors, interior_errors);
  add_test("b1_vs_all", b1_errors, all_errors);
  return rep;
}

nlohmann::json report_to_json(const EvaluationReport& rep) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : rep.folds) {
    folds.push_back({{"fold", f.fold},
                     {"jaccard", json_array(f.jaccard)},
                     {"bound_accuracy", json_array(f.bound_accuracy)},
                     {"bin_mean_error", json_array(f.bin_mean_error)},
                     {"bin_count", f.bin_count}});
  }
  nlohmann::json sig = nlohmann::json::array();
  for (const auto& s : rep.significance)
    sig.push_back({{"label", s.label}, {"t", s.t}, {"p", s.p}, {"significant", s.significant}});
  return {{"q", rep.q_bins},
          {"folds", folds},
          {"mean_jaccard", json_array(rep.mean_jaccard)},
          {"sd_jaccard", json_array(rep.sd_jaccard)},
          {"mean_bound_accuracy", json_array(rep.mean_bound_accuracy)},
          {"sd_bound_accuracy", json_array(rep.sd_bound_accuracy)},
          {"mean_bin_error", json_array(rep.mean_bin_error)},
          {"sd_bin_error", json_array(rep.sd_bin_error)},
          {"mean_bin_count", json_array(rep.mean_bin_count)},
          {"all_mean_error", json_number(rep.all_mean_error)},
          {"all_sd_error", json_number(rep.all_sd_error)},
          {"b1_mean_error", json_number(rep.b1_mean_error)},
          {"b1_sd_error", json_number(rep.b1_sd_error)},
          {"spearman_rho", json_number(rep.spearman_rho_value)},
          {"spearman_p", json_number(rep.spearman_p)},
          {"cdf",
           {{"thresholds", rep.cdf.thresholds},
            {"all", rep.cdf.all_fraction},
            {"b1", rep.cdf.b1_fraction}}},
          {"significance", sig}};
}

}  // namespace qbin
