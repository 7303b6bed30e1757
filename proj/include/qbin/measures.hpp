#pragma once

#include <span>
#include <string>

#include "qbin/heatmap.hpp"

namespace qbin {

enum class Measure { SMHA, EMHA, ECPV };

std::string measure_name(Measure m);
Measure parse_measure(const std::string& name);

struct Extraction {
  RealCoord coord;
  double uncertainty = 0.0;
  Measure measure = Measure::SMHA;
};

constexpr double kDefaultEpsilon = 1e-6;

/// Single-model maximum heatmap activation: coord = argmax, uncertainty = 1/(max + eps).
Extraction s_mha(const Heatmap& h, double epsilon = kDefaultEpsilon);

/// Ensemble MHA: same transform applied to the pixelwise mean heatmap.
Extraction e_mha(std::span<const Heatmap> ensemble, double epsilon = kDefaultEpsilon);

/// Ensemble coordinate prediction variance: mean member argmax, mean
/// Euclidean dispersion about it (pixel units).
Extraction e_cpv(std::span<const Heatmap> ensemble);

/// Euclidean distance scaled to millimetres.
double localization_error(RealCoord pred, RealCoord truth, double pixel_spacing_mm);

}  // namespace qbin
