#include "qbin/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qbin {

IsotonicFit fit_isotonic(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weights) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("fit_isotonic: empty input");
  if (y.size() != n || (!weights.empty() && weights.size() != n))
    throw std::invalid_argument("fit_isotonic: length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit_isotonic: non-finite observation");
    if (!weights.empty() && !(weights[i] > 0.0))
      throw std::invalid_argument("fit_isotonic: weights must be positive");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  // Merge duplicate x to their weighted mean.
  std::vector<double> mx, my, mw;
  for (std::size_t k = 0; k < n;) {
    std::size_t j = k;
    double wsum = 0.0, ysum = 0.0;
    while (j < n && x[order[j]] == x[order[k]]) {
      const double w = weights.empty() ? 1.0 : weights[order[j]];
      wsum += w;
      ysum += w * y[order[j]];
      ++j;
    }
    mx.push_back(x[order[k]]);
    my.push_back(ysum / wsum);
    mw.push_back(wsum);
    k = j;
  }

  // Pool adjacent violators: maintain a stack of blocks with non-decreasing means.
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(mx.size());
  for (std::size_t i = 0; i < mx.size(); ++i) {
    Block b{my[i], mw[i], 1};
    while (!blocks.empty() && blocks.back().mean > b.mean) {
      const Block& prev = blocks.back();
      b.mean = (prev.mean * prev.weight + b.mean * b.weight) / (prev.weight + b.weight);
      b.weight += prev.weight;
      b.count += prev.count;
      blocks.pop_back();
    }
    blocks.push_back(b);
  }

  IsotonicFit fit;
  fit.knots_x = std::move(mx);
  fit.knot_weights = std::move(mw);
  fit.knots_y.reserve(fit.knots_x.size());
  for (const Block& b : blocks)
    for (std::size_t k = 0; k < b.count; ++k) fit.knots_y.push_back(b.mean);
  return fit;
}

IsotonicFit fit_isotonic(std::span<const UncErrTuple> observations) {
  if (observations.empty()) throw std::invalid_argument("fit_isotonic: empty input");
  std::vector<double> x, y;
  x.reserve(observations.size());
  y.reserve(observations.size());
  for (const auto& t : observations) {
    if (!t.error) throw std::invalid_argument("fit_isotonic: observation lacks an error value");
    x.push_back(t.uncertainty);
    y.push_back(*t.error);
  }
  return fit_isotonic(x, y);
}

double eval_isotonic(const IsotonicFit& fit, double x) {
  if (fit.knots_x.empty() || fit.knots_x.size() != fit.knots_y.size())
    throw std::invalid_argument("eval_isotonic: malformed fit");
  if (std::isnan(x)) throw std::invalid_argument("eval_isotonic: NaN input");
  if (x <= fit.knots_x.front()) return fit.knots_y.front();
  if (x >= fit.knots_x.back()) return fit.knots_y.back();
  auto it = std::upper_bound(fit.knots_x.begin(), fit.knots_x.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - fit.knots_x.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - fit.knots_x[lo]) / (fit.knots_x[hi] - fit.knots_x[lo]);
  return fit.knots_y[lo] + t * (fit.knots_y[hi] - fit.knots_y[lo]);
}

ErrorBounds estimate_bounds(const IsotonicFit& fit, const QuantileThresholds& thresholds) {
  ErrorBounds b;
  b.q_bins = thresholds.q_bins;
  b.gammas.reserve(thresholds.alphas.size());
  for (double alpha : thresholds.alphas) b.gammas.push_back(eval_isotonic(fit, alpha));
  return b;
}

nlohmann::json isotonic_to_json(const IsotonicFit& fit) {
  return {{"knots_x", fit.knots_x}, {"knots_y", fit.knots_y}, {"knot_weights", fit.knot_weights}};
}

IsotonicFit isotonic_from_json(const nlohmann::json& j) {
  IsotonicFit fit;
  fit.knots_x = j.at("knots_x").get<std::vector<double>>();
  fit.knots_y = j.at("knots_y").get<std::vector<double>>();
  fit.knot_weights = j.at("knot_weights").get<std::vector<double>>();
  if (fit.knots_x.size() != fit.knots_y.size())
    throw std::runtime_error("isotonic JSON: knot length mismatch");
  return fit;
}

nlohmann::json bounds_to_json(const ErrorBounds& b) {
  return {{"q", b.q_bins}, {"gammas", b.gammas}};
}

ErrorBounds bounds_from_json(const nlohmann::json& j) {
  ErrorBounds b;
  b.q_bins = j.at("q").get<int>();
  b.gammas = j.at("gammas").get<std::vector<double>>();
  if (b.gammas.size() != static_cast<std::size_t>(b.q_bins) + 1)
    throw std::runtime_error("bounds JSON: gamma count does not match Q");
  return b;
}

}  // namespace qbin
