#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qbin/measures.hpp"
#include "qbin/synthetic.hpp"
#include "qbin/tuple_table.hpp"

namespace qbin {

struct RunConfig {
  std::vector<int> q_values{5};
  double epsilon = kDefaultEpsilon;
  double pixel_spacing_mm = 1.0;
  std::vector<Measure> measures{Measure::SMHA, Measure::EMHA, Measure::ECPV};
  bool pool_landmarks = false;
  std::uint64_t seed = 42;
  int member_index = 0;
  bool member_random = false;
  std::vector<double> cdf_thresholds;
  double holdout_fraction = 0.0;  // carve validation out of unlabeled-split inputs
  bool per_fold_correlation = false;
  int workers = 1;
  std::filesystem::path out_dir = ".";
  ColumnMap column_map;
};

struct FailureEntry {
  std::string stage;
  std::string key;
  std::string reason;
};

/// Exit codes: 0 success, 2 partial (failure report non-empty). Fatal
/// conditions throw and the CLI maps them to exit code 1.
struct CommandResult {
  int exit_code = 0;
  std::vector<FailureEntry> failures;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> outputs;
};

/// Writes the failure report (failures.csv under out_dir) when non-empty and
/// sets exit code 2.
void finalize_result(CommandResult& result, const RunConfig& cfg, const std::string& stage);

// simulate: heatmap files (QBHM or CSV) plus manifest.csv.
CommandResult cmd_simulate(const SyntheticConfig& synth, const RunConfig& cfg,
                           const std::string& format = "qbhm",
                           double validation_fraction = 0.5);

// extract: manifest -> tuples.csv, one row per (case, landmark, measure).
CommandResult cmd_extract(const std::filesystem::path& manifest_path, const RunConfig& cfg);

// fit: tuples -> one BinningModel JSON per (landmark, measure, fold, Q).
CommandResult cmd_fit(const std::filesystem::path& tuples_path, const RunConfig& cfg);

// bin: tuples + models -> assignments.csv.
CommandResult cmd_bin(const std::filesystem::path& tuples_path,
                      const std::filesystem::path& models_dir, const RunConfig& cfg);

// evaluate: assignments -> report JSON + CSV tables per Q.
CommandResult cmd_evaluate(const std::filesystem::path& assignments_path, const RunConfig& cfg);

// report: re-emit summary tables from a report JSON; returns rendered text.
std::string cmd_report(const std::filesystem::path& report_json_path);

}  // namespace qbin
