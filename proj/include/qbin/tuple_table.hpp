#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbin/binning.hpp"
#include "qbin/isotonic.hpp"
#include "qbin/measures.hpp"

namespace qbin {

enum class Split { Validation, Test };

std::string split_name(Split s);
Split parse_split(const std::string& name);

/// One row of the tuple CSV (schema: uid,landmark,fold,split,measure,
/// uncertainty,error,pred_row,pred_col,gt_row,gt_col; optionals empty).
struct TupleTableRow {
  std::string uid;
  std::string landmark;
  int fold = 0;
  Split split = Split::Test;
  Measure measure = Measure::SMHA;
  double uncertainty = 0.0;
  std::optional<double> error;
  std::optional<double> pred_row, pred_col;
  std::optional<double> gt_row, gt_col;
};

/// Maps our column names to the names used in a foreign CSV.
using ColumnMap = std::map<std::string, std::string>;

ColumnMap column_map_from_json(const nlohmann::json& j);

std::vector<TupleTableRow> parse_tuple_csv(const std::string& text, const ColumnMap& map = {});
std::string render_tuple_csv(const std::vector<TupleTableRow>& rows);

std::vector<TupleTableRow> read_tuple_csv(const std::filesystem::path& path,
                                          const ColumnMap& map = {});
void write_tuple_csv(const std::filesystem::path& path, const std::vector<TupleTableRow>& rows);

/// Fitted per-(landmark, measure, fold, Q) calibration artifacts.
struct BinningModel {
  std::string landmark;  // "*" when pooled across landmarks
  Measure measure = Measure::SMHA;
  int fold = 0;
  QuantileThresholds thresholds;
  IsotonicFit isotonic;
  ErrorBounds bounds;
};

nlohmann::json model_to_json(const BinningModel& m);
BinningModel model_from_json(const nlohmann::json& j);

void write_model(const std::filesystem::path& path, const BinningModel& m);
BinningModel read_model(const std::filesystem::path& path);

std::string model_filename(const BinningModel& m);

/// One row of the assignment CSV. Open interval sides are empty fields.
struct AssignmentRow {
  std::string uid;
  std::string landmark;
  int fold = 0;
  Measure measure = Measure::SMHA;
  int q_bins = 0;
  int bin = 0;
  double uncertainty = 0.0;
  std::optional<double> error;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
};

std::string render_assignment_csv(const std::vector<AssignmentRow>& rows);
std::vector<AssignmentRow> parse_assignment_csv(const std::string& text);

void write_assignment_csv(const std::filesystem::path& path, const std::vector<AssignmentRow>& rows);
std::vector<AssignmentRow> read_assignment_csv(const std::filesystem::path& path);

}  // namespace qbin
