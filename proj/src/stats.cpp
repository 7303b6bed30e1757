#include "qbin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace qbin {

namespace {

double two_sided_t_pvalue(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(dist, -std::fabs(t));
}

double sample_mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

void average_ranks(std::span<const double> values, std::span<double> out) {
  const std::size_t n = values.size();
  if (out.size() != n) throw std::invalid_argument("average_ranks: output size mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank;
    i = j + 1;
  }
}

SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) throw std::invalid_argument("spearman_rho: need n >= 3 paired values");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("spearman_rho: non-finite value");
  const bool x_const = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  const bool y_const = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
  if (x_const || y_const)
    throw std::invalid_argument("spearman_rho: correlation undefined for constant input");

  std::vector<double> rx(n), ry(n);
  average_ranks(x, rx);
  average_ranks(y, ry);

  // Pearson correlation of the ranks (handles ties).
  const double mx = sample_mean(rx);
  const double my = sample_mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);

  SpearmanResult res;
  res.rho = rho;
  if (std::fabs(rho) >= 1.0) {
    res.p_value = 0.0;
  } else {
    const double df = static_cast<double>(n - 2);
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    res.p_value = two_sided_t_pvalue(t, df);
  }
  return res;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: each group needs n >= 2");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = sample_mean(a);
  const double mb = sample_mean(b);
  const double va = sample_variance(a, ma);
  const double vb = sample_variance(b, mb);
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) throw std::invalid_argument("welch_t_test: zero variance in both groups");
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  TTestResult res;
  res.t = t;
  res.df = df;
  res.p = two_sided_t_pvalue(t, df);
  res.significant_at_0_05 = res.p <= 0.05;
  return res;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: unequal lengths");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need n >= 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double md = sample_mean(d);
  const double vd = sample_variance(d, md);
  if (vd == 0.0) throw std::invalid_argument("paired_t_test: zero-variance differences");
  const double n = static_cast<double>(d.size());
  const double t = md / std::sqrt(vd / n);
  TTestResult res;
  res.t = t;
  res.df = n - 1.0;
  res.p = two_sided_t_pvalue(t, res.df);
  res.significant_at_0_05 = res.p <= 0.05;
  return res;
}

TTestResult significance_test(std::span<const double> a, std::span<const double> b, bool paired) {
  return paired ? paired_t_test(a, b) : welch_t_test(a, b);
}

}  // namespace qbin
