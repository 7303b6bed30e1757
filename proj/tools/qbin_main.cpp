#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qbin/pipeline.hpp"
#include "qbin/util.hpp"

namespace {

using qbin::RunConfig;

struct CliState {
  RunConfig cfg;
  qbin::SyntheticConfig synth;
  std::string config_path;
  std::vector<std::string> measure_names{"smha", "emha", "ecpv"};
  std::string column_map_path;
  std::string format = "qbhm";
  double validation_fraction = 0.5;
};

// The JSON config mirrors the flags; explicit flags override it.
void apply_config_file(CliState& st) {
  if (st.config_path.empty()) return;
  auto j = nlohmann::json::parse(qbin::read_file(st.config_path));
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("q", st.cfg.q_values);
  get("epsilon", st.cfg.epsilon);
  get("pixel_spacing_mm", st.cfg.pixel_spacing_mm);
  get("measures", st.measure_names);
  get("pool_landmarks", st.cfg.pool_landmarks);
  get("seed", st.cfg.seed);
  get("member_index", st.cfg.member_index);
  get("member_random", st.cfg.member_random);
  get("cdf_thresholds", st.cfg.cdf_thresholds);
  get("holdout_fraction", st.cfg.holdout_fraction);
  get("per_fold_correlation", st.cfg.per_fold_correlation);
  get("workers", st.cfg.workers);
  std::string out_dir;
  get("out_dir", out_dir);
  if (!out_dir.empty()) st.cfg.out_dir = out_dir;
  if (j.contains("column_map")) st.cfg.column_map = qbin::column_map_from_json(j.at("column_map"));
  get("n_images", st.synth.n_images);
  get("grid_height", st.synth.height);
  get("grid_width", st.synth.width);
  get("ensemble_size", st.synth.ensemble_size);
  get("peak_sigma", st.synth.peak_sigma);
  get("jitter", st.synth.epistemic_jitter_sigma);
  get("aleatoric_sigma_major", st.synth.aleatoric.sigma_major);
  get("aleatoric_sigma_minor", st.synth.aleatoric.sigma_minor);
  get("aleatoric_orientation", st.synth.aleatoric.orientation);
  get("outlier_rate", st.synth.outlier_rate);
  get("outlier_displacement", st.synth.outlier_displacement);
  get("format", st.format);
  get("validation_fraction", st.validation_fraction);
}

void add_common(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "JSON config mirroring all flags");
  cmd->add_option("--q", st.cfg.q_values, "number(s) of quantile bins");
  cmd->add_option("--epsilon", st.cfg.epsilon, "MHA epsilon");
  cmd->add_option("--pixel-spacing-mm", st.cfg.pixel_spacing_mm, "mm per pixel");
  cmd->add_option("--measures", st.measure_names, "uncertainty measures (smha emha ecpv)");
  cmd->add_flag("--pool-landmarks", st.cfg.pool_landmarks, "fit thresholds pooled across landmarks");
  cmd->add_option("--seed", st.cfg.seed, "RNG seed");
  cmd->add_option("--member-index", st.cfg.member_index, "ensemble member used for S-MHA");
  cmd->add_flag("--member-random", st.cfg.member_random,
                "pick the S-MHA member pseudo-randomly per case (seeded)");
  cmd->add_option("--cdf-thresholds", st.cfg.cdf_thresholds, "error thresholds (mm) for CDF series");
  cmd->add_option("--holdout-fraction", st.cfg.holdout_fraction,
                  "carve this fraction of test rows into the validation split");
  cmd->add_flag("--per-fold-correlation", st.cfg.per_fold_correlation,
                "average per-fold Spearman rho instead of pooling");
  cmd->add_option("--workers", st.cfg.workers, "worker threads");
  cmd->add_option("--out-dir", st.cfg.out_dir, "output directory");
  cmd->add_option("--column-map", st.column_map_path, "JSON column-name mapping for foreign CSVs");
}

int finish(const qbin::CommandResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : result.failures)
    std::cerr << "failed: " << f.stage << " " << f.key << ": " << f.reason << "\n";
  for (const auto& p : result.outputs) std::cout << p.string() << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile-binning uncertainty calibration toolkit"};
  app.require_subcommand(1);
  CliState st;

  auto* simulate = app.add_subcommand("simulate", "generate synthetic heatmap cases + manifest");
  add_common(simulate, st);
  simulate->add_option("--n-images", st.synth.n_images, "number of cases");
  simulate->add_option("--grid-height", st.synth.height, "heatmap height");
  simulate->add_option("--grid-width", st.synth.width, "heatmap width");
  simulate->add_option("--ensemble-size", st.synth.ensemble_size, "ensemble members per case");
  simulate->add_option("--peak-sigma", st.synth.peak_sigma, "rendered Gaussian sigma (px)");
  simulate->add_option("--jitter", st.synth.epistemic_jitter_sigma,
                       "epistemic peak displacement sd (px)");
  simulate->add_option("--aleatoric-sigma-major", st.synth.aleatoric.sigma_major,
                       "annotation noise major sd (px)");
  simulate->add_option("--aleatoric-sigma-minor", st.synth.aleatoric.sigma_minor,
                       "annotation noise minor sd (px)");
  simulate->add_option("--aleatoric-orientation", st.synth.aleatoric.orientation,
                       "annotation noise orientation (rad)");
  simulate->add_option("--outlier-rate", st.synth.outlier_rate, "per-case gross misprediction rate");
  simulate->add_option("--outlier-displacement", st.synth.outlier_displacement,
                       "gross misprediction magnitude (px)");
  simulate->add_option("--format", st.format, "heatmap file format: qbhm or csv");
  simulate->add_option("--validation-fraction", st.validation_fraction,
                       "fraction of cases labeled validation");

  std::string manifest_path, tuples_path, models_dir, assignments_path, report_path;
  auto* extract = app.add_subcommand("extract", "manifest -> uncertainty/error tuple table");
  add_common(extract, st);
  extract->add_option("--manifest", manifest_path, "manifest CSV")->required();

  auto* fit = app.add_subcommand("fit", "fit quantile thresholds + isotonic error bounds");
  add_common(fit, st);
  fit->add_option("--tuples", tuples_path, "tuple CSV")->required();

  auto* bin = app.add_subcommand("bin", "assign test tuples to uncertainty bins");
  add_common(bin, st);
  bin->add_option("--tuples", tuples_path, "tuple CSV")->required();
  bin->add_option("--models", models_dir, "directory of BinningModel JSON files")->required();

  auto* evaluate = app.add_subcommand("evaluate", "compute Jaccard, bound accuracy, stats");
  add_common(evaluate, st);
  evaluate->add_option("--assignments", assignments_path, "assignment CSV")->required();

  auto* report = app.add_subcommand("report", "print a summary of a report JSON");
  add_common(report, st);
  report->add_option("--report", report_path, "report JSON")->required();

  // first pass: pick up --config so flags can override it
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (!st.config_path.empty()) {
      apply_config_file(st);
      app.clear();
      app.parse(argc, argv);  // reapply explicit flags on top of config values
    }
    if (!st.column_map_path.empty())
      st.cfg.column_map =
          qbin::column_map_from_json(nlohmann::json::parse(qbin::read_file(st.column_map_path)));
    st.cfg.measures.clear();
    for (const auto& name : st.measure_names) st.cfg.measures.push_back(qbin::parse_measure(name));
    st.synth.seed = st.cfg.seed;

    if (simulate->parsed()) return finish(qbin::cmd_simulate(st.synth, st.cfg, st.format, st.validation_fraction));
    if (extract->parsed()) return finish(qbin::cmd_extract(manifest_path, st.cfg));
    if (fit->parsed()) return finish(qbin::cmd_fit(tuples_path, st.cfg));
    if (bin->parsed()) return finish(qbin::cmd_bin(tuples_path, models_dir, st.cfg));
    if (evaluate->parsed()) return finish(qbin::cmd_evaluate(assignments_path, st.cfg));
    if (report->parsed()) {
      std::cout << qbin::cmd_report(report_path);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
