#include "qbin/heatmap.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbin {

namespace {

void check_dims(int height, int width) {
  if (height < 1 || width < 1) throw std::invalid_argument("heatmap dimensions must be positive");
}

}  // namespace

Heatmap::Heatmap(int height, int width, double fill) : height_(height), width_(width) {
  check_dims(height, width);
  if (!std::isfinite(fill)) throw std::invalid_argument("heatmap fill must be finite");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

Heatmap::Heatmap(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_dims(height, width);
  if (values_.size() != static_cast<std::size_t>(height) * width)
    throw std::invalid_argument("heatmap value count does not match dimensions");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("heatmap activations must be finite");
}

void Heatmap::scale(double factor) {
  if (!std::isfinite(factor)) throw std::invalid_argument("scale factor must be finite");
  for (double& v : values_) v *= factor;
}

Heatmap render_gaussian(const GaussianSpec& spec, int height, int width) {
  check_dims(height, width);
  if (!std::isfinite(spec.sigma_major) || !std::isfinite(spec.sigma_minor) ||
      spec.sigma_minor <= 0.0 || spec.sigma_major < spec.sigma_minor)
    throw std::invalid_argument("invalid gaussian spec: require sigma_major >= sigma_minor > 0");
  if (!std::isfinite(spec.center.row) || !std::isfinite(spec.center.col) ||
      !std::isfinite(spec.orientation))
    throw std::invalid_argument("invalid gaussian spec: non-finite center or orientation");

  const double amp = spec.amplitude == AmplitudeMode::PeakOne
                         ? 1.0
                         : 1.0 / (2.0 * std::numbers::pi * spec.sigma_major * spec.sigma_minor);

  Heatmap out(height, width);
  if (spec.sigma_major == spec.sigma_minor) {
    // Isotropic: separable along rows and columns.
    const double inv2s2 = 1.0 / (2.0 * spec.sigma_major * spec.sigma_major);
    std::vector<double> row_factor(static_cast<std::size_t>(height));
    std::vector<double> col_factor(static_cast<std::size_t>(width));
    for (int r = 0; r < height; ++r) {
      const double d = r - spec.center.row;
      row_factor[static_cast<std::size_t>(r)] = std::exp(-d * d * inv2s2);
    }
    for (int c = 0; c < width; ++c) {
      const double d = c - spec.center.col;
      col_factor[static_cast<std::size_t>(c)] = std::exp(-d * d * inv2s2);
    }
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c)
        out.at(r, c) = amp * row_factor[static_cast<std::size_t>(r)] * col_factor[static_cast<std::size_t>(c)];
    return out;
  }

  // Anisotropic: exponent -1/2 d^T Sigma^-1 d with
  // Sigma = R(theta) diag(sigma_major^2, sigma_minor^2) R(theta)^T.
  const double ct = std::cos(spec.orientation);
  const double st = std::sin(spec.orientation);
  const double ia = 1.0 / (spec.sigma_major * spec.sigma_major);
  const double ib = 1.0 / (spec.sigma_minor * spec.sigma_minor);
  const double qrr = ct * ct * ia + st * st * ib;
  const double qcc = st * st * ia + ct * ct * ib;
  const double qrc = ct * st * (ia - ib);
  for (int r = 0; r < height; ++r) {
    const double dr = r - spec.center.row;
    for (int c = 0; c < width; ++c) {
      const double dc = c - spec.center.col;
      const double quad = qrr * dr * dr + 2.0 * qrc * dr * dc + qcc * dc * dc;
      out.at(r, c) = amp * std::exp(-0.5 * quad);
    }
  }
  return out;
}

std::pair<PixelCoord, double> argmax_coord(const Heatmap& h) {
  if (h.height() < 1 || h.width() < 1) throw std::invalid_argument("argmax_coord: empty heatmap");
  std::size_t best = 0;
  auto vals = h.values();
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > vals[best]) best = i;
  PixelCoord p{static_cast<int>(best / h.width()), static_cast<int>(best % h.width())};
  return {p, vals[best]};
}

Heatmap mean_heatmap(std::span<const Heatmap> ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("mean_heatmap: empty ensemble");
  const int h = ensemble.front().height();
  const int w = ensemble.front().width();
  for (const Heatmap& m : ensemble)
    if (m.height() != h || m.width() != w)
      throw std::invalid_argument("mean_heatmap: dimension mismatch across ensemble");
  Heatmap out(h, w);
  auto& acc = out.mutable_values();
  for (const Heatmap& m : ensemble) {
    auto vals = m.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += vals[i];
  }
  const double inv = 1.0 / static_cast<double>(ensemble.size());
  for (double& v : acc) v *= inv;
  return out;
}

}  // namespace qbin
