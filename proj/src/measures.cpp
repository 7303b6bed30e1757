#include "qbin/measures.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbin {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must satisfy 0 < epsilon < 1");
}

double mha_uncertainty(double max_activation, double epsilon) {
  if (max_activation < 0.0)
    throw std::invalid_argument("MHA requires a non-negative maximum activation");
  return 1.0 / (max_activation + epsilon);
}

}  // namespace

std::string measure_name(Measure m) {
  switch (m) {
    case Measure::SMHA: return "smha";
    case Measure::EMHA: return "emha";
    case Measure::ECPV: return "ecpv";
  }
  throw std::invalid_argument("unknown measure");
}

Measure parse_measure(const std::string& name) {
  if (name == "smha" || name == "s-mha") return Measure::SMHA;
  if (name == "emha" || name == "e-mha") return Measure::EMHA;
  if (name == "ecpv" || name == "e-cpv") return Measure::ECPV;
  throw std::invalid_argument("unknown measure: " + name);
}

Extraction s_mha(const Heatmap& h, double epsilon) {
  check_epsilon(epsilon);
  auto [pix, act] = argmax_coord(h);
  return {{static_cast<double>(pix.row), static_cast<double>(pix.col)},
          mha_uncertainty(act, epsilon),
          Measure::SMHA};
}

Extraction e_mha(std::span<const Heatmap> ensemble, double epsilon) {
  check_epsilon(epsilon);
  Heatmap mean = mean_heatmap(ensemble);
  auto [pix, act] = argmax_coord(mean);
  return {{static_cast<double>(pix.row), static_cast<double>(pix.col)},
          mha_uncertainty(act, epsilon),
          Measure::EMHA};
}

Extraction e_cpv(std::span<const Heatmap> ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("e_cpv: empty ensemble");
  const int h = ensemble.front().height();
  const int w = ensemble.front().width();
  std::vector<PixelCoord> peaks;
  peaks.reserve(ensemble.size());
  for (const Heatmap& m : ensemble) {
    if (m.height() != h || m.width() != w)
      throw std::invalid_argument("e_cpv: dimension mismatch across ensemble");
    peaks.push_back(argmax_coord(m).first);
  }
  RealCoord mean{0.0, 0.0};
  for (const PixelCoord& p : peaks) {
    mean.row += p.row;
    mean.col += p.col;
  }
  mean.row /= static_cast<double>(peaks.size());
  mean.col /= static_cast<double>(peaks.size());
  double dispersion = 0.0;
  for (const PixelCoord& p : peaks)
    dispersion += std::hypot(p.row - mean.row, p.col - mean.col);
  dispersion /= static_cast<double>(peaks.size());
  return {mean, dispersion, Measure::ECPV};
}

double localization_error(RealCoord pred, RealCoord truth, double pixel_spacing_mm) {
  if (!std::isfinite(pred.row) || !std::isfinite(pred.col) || !std::isfinite(truth.row) ||
      !std::isfinite(truth.col))
    throw std::invalid_argument("localization_error: non-finite coordinates");
  if (!(pixel_spacing_mm > 0.0) || !std::isfinite(pixel_spacing_mm))
    throw std::invalid_argument("localization_error: pixel spacing must be positive");
  return std::hypot(pred.row - truth.row, pred.col - truth.col) * pixel_spacing_mm;
}

}  // namespace qbin
