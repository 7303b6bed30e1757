#include "qbin/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "qbin/binning.hpp"
#include "qbin/isotonic.hpp"
#include "qbin/rng.hpp"
#include "qbin/util.hpp"

namespace qbin {

namespace {

constexpr int kPeakRedrawLimit = 32;

void validate(const SyntheticConfig& cfg) {
  if (cfg.n_images < 0) throw std::invalid_argument("synthetic: n_images must be >= 0");
  if (cfg.height < 1 || cfg.width < 1) throw std::invalid_argument("synthetic: grid must be positive");
  if (cfg.ensemble_size < 1) throw std::invalid_argument("synthetic: ensemble_size must be >= 1");
  if (!(cfg.peak_sigma > 0.0)) throw std::invalid_argument("synthetic: peak_sigma must be positive");
  if (cfg.epistemic_jitter_sigma < 0.0)
    throw std::invalid_argument("synthetic: jitter sd must be non-negative");
  if (cfg.aleatoric.sigma_major < 0.0 || cfg.aleatoric.sigma_minor < 0.0 ||
      cfg.aleatoric.sigma_major < cfg.aleatoric.sigma_minor)
    throw std::invalid_argument("synthetic: require aleatoric sigma_major >= sigma_minor >= 0");
  if (cfg.outlier_rate < 0.0 || cfg.outlier_rate > 1.0)
    throw std::invalid_argument("synthetic: outlier_rate must be in [0, 1]");
  if (cfg.outlier_rate > 0.0 && !(cfg.outlier_displacement > 0.0))
    throw std::invalid_argument("synthetic: outlier_displacement must be positive when used");
}

RealCoord aleatoric_draw(Rng& rng, const AleatoricSpec& spec, double scale) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double ct = std::cos(spec.orientation);
  const double st = std::sin(spec.orientation);
  const double major = spec.sigma_major * z1 * scale;
  const double minor = spec.sigma_minor * z2 * scale;
  return {ct * major - st * minor, st * major + ct * minor};
}

bool inside(const RealCoord& c, int height, int width) {
  return c.row >= 0.0 && c.row <= height - 1 && c.col >= 0.0 && c.col <= width - 1;
}

RealCoord clamp_to_grid(RealCoord c, int height, int width) {
  c.row = std::clamp(c.row, 0.0, static_cast<double>(height - 1));
  c.col = std::clamp(c.col, 0.0, static_cast<double>(width - 1));
  return c;
}

SyntheticCase make_case(const SyntheticConfig& cfg, std::size_t index) {
  Rng rng(mix_seed(cfg.seed, index));
  SyntheticCase out;
  out.id = "case" + std::to_string(index);

  const double margin =
      std::min({2.0 * cfg.peak_sigma, (cfg.height - 1) * 0.25, (cfg.width - 1) * 0.25});
  out.true_coord.row = rng.uniform(margin, cfg.height - 1 - margin);
  out.true_coord.col = rng.uniform(margin, cfg.width - 1 - margin);

  // Per-case difficulty scales with unit mean square, shared by all members,
  // so realized dispersion carries information about expected error.
  const double epistemic_scale = std::sqrt(rng.exponential());
  const double aleatoric_scale = std::sqrt(rng.exponential());
  out.outlier = rng.uniform() < cfg.outlier_rate;

  RealCoord annot_noise = aleatoric_draw(rng, cfg.aleatoric, aleatoric_scale);
  out.annotated_coord = clamp_to_grid(
      {out.true_coord.row + annot_noise.row, out.true_coord.col + annot_noise.col}, cfg.height,
      cfg.width);

  out.ensemble.reserve(static_cast<std::size_t>(cfg.ensemble_size));
  for (int t = 0; t < cfg.ensemble_size; ++t) {
    RealCoord peak;
    RealCoord epist;
    bool accepted = false;
    for (int attempt = 0; attempt < kPeakRedrawLimit && !accepted; ++attempt) {
      if (out.outlier) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        epist = {cfg.outlier_displacement * std::cos(theta),
                 cfg.outlier_displacement * std::sin(theta)};
      } else {
        epist = {cfg.epistemic_jitter_sigma * epistemic_scale * rng.normal(),
                 cfg.epistemic_jitter_sigma * epistemic_scale * rng.normal()};
      }
      RealCoord alea = aleatoric_draw(rng, cfg.aleatoric, aleatoric_scale);
      peak = {out.true_coord.row + epist.row + alea.row,
              out.true_coord.col + epist.col + alea.col};
      accepted = inside(peak, cfg.height, cfg.width);
    }
    if (!accepted) {
      peak = clamp_to_grid(peak, cfg.height, cfg.width);
      ++out.clamped_members;
    }
    // Peak activation decays with the epistemic miss: a member that predicts
    // far from the landmark is also less confident, which is what the MHA
    // measures key on.
    const double miss2 = epist.row * epist.row + epist.col * epist.col;
    const double amplitude = std::exp(-miss2 / (2.0 * cfg.peak_sigma * cfg.peak_sigma));
    Heatmap hm = render_gaussian({peak, cfg.peak_sigma, cfg.peak_sigma, 0.0, AmplitudeMode::PeakOne},
                                 cfg.height, cfg.width);
    hm.scale(amplitude);
    out.ensemble.push_back(std::move(hm));
  }
  return out;
}

}  // namespace

std::vector<SyntheticCase> generate_cases(const SyntheticConfig& cfg, int workers) {
  validate(cfg);
  if (workers < 1) throw std::invalid_argument("generate_cases: workers must be >= 1");
  std::vector<SyntheticCase> cases(static_cast<std::size_t>(cfg.n_images));
  if (cfg.n_images == 0) return cases;
  if (workers == 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) cases[i] = make_case(cfg, i);
    return cases;
  }
  std::vector<std::thread> pool;
  const std::size_t n = cases.size();
  const int used = std::min<int>(workers, static_cast<int>(n));
  for (int w = 0; w < used; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(used))
        cases[i] = make_case(cfg, i);
    });
  }
  for (auto& th : pool) th.join();
  return cases;
}

std::vector<SyntheticExtraction> extract_cases(std::span<const SyntheticCase> cases,
                                               Measure measure, double epsilon, int member_index) {
  std::vector<SyntheticExtraction> out;
  out.reserve(cases.size());
  for (const auto& c : cases) {
    Extraction ex;
    switch (measure) {
      case Measure::SMHA: {
        if (member_index < 0 || member_index >= static_cast<int>(c.ensemble.size()))
          throw std::invalid_argument("extract_cases: member index out of range");
        ex = s_mha(c.ensemble[static_cast<std::size_t>(member_index)], epsilon);
        break;
      }
      case Measure::EMHA:
        ex = e_mha(c.ensemble, epsilon);
        break;
      case Measure::ECPV:
        ex = e_cpv(c.ensemble);
        break;
    }
    out.push_back({c.id, ex.uncertainty,
                   localization_error(ex.coord, c.annotated_coord, 1.0), c.outlier});
  }
  return out;
}

EvaluationReport end_to_end_synthetic(const SyntheticConfig& cfg, int q_bins, Measure measure,
                                      double epsilon, int member_index) {
  if (q_bins < 2) throw std::invalid_argument("end_to_end_synthetic: Q must be >= 2");
  auto cases = generate_cases(cfg);
  auto extracted = extract_cases(cases, measure, epsilon, member_index);
  const std::size_t n_val = extracted.size() / 2;
  if (static_cast<int>(n_val) < q_bins || static_cast<int>(extracted.size() - n_val) < q_bins)
    throw std::invalid_argument("end_to_end_synthetic: too few cases for Q bins");

  std::vector<UncErrTuple> validation;
  for (std::size_t i = 0; i < n_val; ++i)
    validation.push_back({extracted[i].id, extracted[i].uncertainty, extracted[i].error});
  auto thresholds = fit_thresholds(validation, q_bins);
  auto iso = fit_isotonic(validation);
  auto bounds = estimate_bounds(iso, thresholds);

  std::vector<AssignedError> test;
  for (std::size_t i = n_val; i < extracted.size(); ++i)
    test.push_back({extracted[i].id, assign_bin(thresholds, extracted[i].uncertainty),
                    extracted[i].uncertainty, extracted[i].error, 0});

  FoldMetrics fm = compute_fold_metrics(0, test, bounds, q_bins);
  AggregateOptions opts;
  opts.q_bins = q_bins;
  return aggregate_folds(std::vector<FoldMetrics>{fm}, test, opts);
}

}  // namespace qbin
