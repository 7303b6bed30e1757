#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbin/evaluation.hpp"
#include "qbin/heatmap.hpp"
#include "qbin/measures.hpp"

namespace qbin {

/// Covariance of the annotation (aleatoric) noise; sigmas in pixels. The same
/// covariance drives per-member aleatoric peak scatter, so ensemble
/// disagreement reflects landmark ambiguity.
struct AleatoricSpec {
  double sigma_major = 0.0;
  double sigma_minor = 0.0;
  double orientation = 0.0;  // radians
};

struct SyntheticConfig {
  std::uint64_t seed = 0;
  int n_images = 0;
  int height = 64;
  int width = 64;
  int ensemble_size = 5;
  double peak_sigma = 8.0;
  // Marginal sd (pixels) of per-member epistemic peak displacement. Each case
  // draws a difficulty scale with unit mean square, so displacement magnitude
  // varies across cases while the marginal sd stays at this value.
  double epistemic_jitter_sigma = 0.0;
  AleatoricSpec aleatoric;
  double outlier_rate = 0.0;          // per-case probability of a gross misprediction
  double outlier_displacement = 0.0;  // pixels; each member displaced in its own direction
};

struct SyntheticCase {
  std::string id;
  RealCoord true_coord;
  RealCoord annotated_coord;
  bool outlier = false;
  int clamped_members = 0;  // peaks clamped to the grid after redraw retries
  std::vector<Heatmap> ensemble;
};

/// Deterministic for a fixed seed; each case has its own RNG stream derived
/// from (seed, case index), so results do not depend on worker count.
std::vector<SyntheticCase> generate_cases(const SyntheticConfig& cfg, int workers = 1);

struct SyntheticExtraction {
  std::string id;
  double uncertainty = 0.0;
  double error = 0.0;  // pixels, against the annotated coordinate
  bool outlier = false;
};

std::vector<SyntheticExtraction> extract_cases(std::span<const SyntheticCase> cases,
                                               Measure measure,
                                               double epsilon = kDefaultEpsilon,
                                               int member_index = 0);

/// Full pipeline on generated cases: first half fits thresholds and bounds,
/// second half is evaluated.
EvaluationReport end_to_end_synthetic(const SyntheticConfig& cfg, int q_bins, Measure measure,
                                      double epsilon = kDefaultEpsilon, int member_index = 0);

}  // namespace qbin
