#pragma once

#include <span>
#include <utility>
#include <vector>

namespace qbin {

struct PixelCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct RealCoord {
  double row = 0.0;
  double col = 0.0;
  friend bool operator==(const RealCoord&, const RealCoord&) = default;
};

enum class AmplitudeMode { PeakOne, Normalized };

/// Elliptical Gaussian bump. Isotropic when sigma_major == sigma_minor,
/// in which case orientation is ignored.
struct GaussianSpec {
  RealCoord center;
  double sigma_major = 1.0;
  double sigma_minor = 1.0;
  double orientation = 0.0;  // radians, major axis measured in the (row, col) plane
  AmplitudeMode amplitude = AmplitudeMode::PeakOne;
};

/// Rectangular grid of finite activations, row-major.
class Heatmap {
 public:
  Heatmap() = default;
  Heatmap(int height, int width, double fill = 0.0);
  Heatmap(int height, int width, std::vector<double> values);

  int height() const { return height_; }
  int width() const { return width_; }

  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }

  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  void scale(double factor);

  friend bool operator==(const Heatmap&, const Heatmap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

Heatmap render_gaussian(const GaussianSpec& spec, int height, int width);

/// Maximal pixel and its activation; ties broken by smallest row-major index.
std::pair<PixelCoord, double> argmax_coord(const Heatmap& h);

/// Pixelwise arithmetic mean of an ensemble sharing dimensions.
Heatmap mean_heatmap(std::span<const Heatmap> ensemble);

}  // namespace qbin
