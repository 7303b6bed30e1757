#include "qbin/tuple_table.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "qbin/util.hpp"

namespace qbin {

namespace {

const std::vector<std::string> kTupleColumns = {
    "uid", "landmark", "fold", "split", "measure", "uncertainty",
    "error", "pred_row", "pred_col", "gt_row", "gt_col"};

const std::vector<std::string> kAssignmentColumns = {
    "uid", "landmark", "fold", "measure", "q", "bin",
    "uncertainty", "error", "lower_bound", "upper_bound"};

std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

struct HeaderIndex {
  std::unordered_map<std::string, std::size_t> by_name;

  std::optional<std::size_t> find(const std::string& ours, const ColumnMap& map) const {
    auto mapped = map.find(ours);
    const std::string& name = mapped != map.end() ? mapped->second : ours;
    auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    return it->second;
  }
};

HeaderIndex parse_header(const std::string& line) {
  HeaderIndex idx;
  auto fields = split_csv_line(line);
  for (std::size_t i = 0; i < fields.size(); ++i) idx.by_name[fields[i]] = i;
  return idx;
}

std::string field_at(const std::vector<std::string>& fields, std::optional<std::size_t> idx) {
  if (!idx || *idx >= fields.size()) return {};
  return fields[*idx];
}

}  // namespace

std::string split_name(Split s) { return s == Split::Validation ? "validation" : "test"; }

Split parse_split(const std::string& name) {
  if (name == "validation" || name == "val") return Split::Validation;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split: " + name);
}

ColumnMap column_map_from_json(const nlohmann::json& j) {
  ColumnMap map;
  for (auto it = j.begin(); it != j.end(); ++it) map[it.key()] = it.value().get<std::string>();
  return map;
}

std::vector<TupleTableRow> parse_tuple_csv(const std::string& text, const ColumnMap& map) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("tuple CSV: missing header");
  HeaderIndex header = parse_header(line);
  for (const char* required : {"uid", "uncertainty"})
    if (!header.find(required, map))
      throw std::runtime_error(std::string("tuple CSV: missing required column ") + required);

  std::vector<TupleTableRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    TupleTableRow r;
    try {
      r.uid = field_at(fields, header.find("uid", map));
      r.landmark = field_at(fields, header.find("landmark", map));
      if (r.landmark.empty()) r.landmark = "l0";
      auto fold = field_at(fields, header.find("fold", map));
      r.fold = fold.empty() ? 0 : static_cast<int>(parse_double(fold));
      auto split = field_at(fields, header.find("split", map));
      r.split = split.empty() ? Split::Test : parse_split(split);
      auto measure = field_at(fields, header.find("measure", map));
      r.measure = measure.empty() ? Measure::SMHA : parse_measure(measure);
      r.uncertainty = parse_double(field_at(fields, header.find("uncertainty", map)));
      r.error = parse_opt(field_at(fields, header.find("error", map)));
      r.pred_row = parse_opt(field_at(fields, header.find("pred_row", map)));
      r.pred_col = parse_opt(field_at(fields, header.find("pred_col", map)));
      r.gt_row = parse_opt(field_at(fields, header.find("gt_row", map)));
      r.gt_col = parse_opt(field_at(fields, header.find("gt_col", map)));
    } catch (const std::exception& e) {
      throw std::runtime_error("tuple CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_tuple_csv(const std::vector<TupleTableRow>& rows) {
  std::string out = join_csv(kTupleColumns) + "\n";
  for (const auto& r : rows) {
    out += join_csv({r.uid, r.landmark, std::to_string(r.fold), split_name(r.split),
                     measure_name(r.measure), format_double(r.uncertainty), opt_field(r.error),
                     opt_field(r.pred_row), opt_field(r.pred_col), opt_field(r.gt_row),
                     opt_field(r.gt_col)});
    out += '\n';
  }
  return out;
}

std::vector<TupleTableRow> read_tuple_csv(const std::filesystem::path& path, const ColumnMap& map) {
  return parse_tuple_csv(read_file(path), map);
}

void write_tuple_csv(const std::filesystem::path& path, const std::vector<TupleTableRow>& rows) {
  atomic_write(path, render_tuple_csv(rows));
}

nlohmann::json model_to_json(const BinningModel& m) {
  nlohmann::json j = thresholds_to_json(m.thresholds);
  j["measure"] = measure_name(m.measure);
  j["landmark"] = m.landmark;
  j["fold"] = m.fold;
  j["isotonic"] = isotonic_to_json(m.isotonic);
  j["gammas"] = m.bounds.gammas;
  return j;
}

BinningModel model_from_json(const nlohmann::json& j) {
  BinningModel m;
  m.thresholds = thresholds_from_json(j);
  m.measure = parse_measure(j.at("measure").get<std::string>());
  m.landmark = j.at("landmark").get<std::string>();
  m.fold = j.at("fold").get<int>();
  m.isotonic = isotonic_from_json(j.at("isotonic"));
  m.bounds.q_bins = m.thresholds.q_bins;
  m.bounds.gammas = j.at("gammas").get<std::vector<double>>();
  if (m.bounds.gammas.size() != static_cast<std::size_t>(m.bounds.q_bins) + 1)
    throw std::runtime_error("model JSON: gamma count does not match Q");
  return m;
}

void write_model(const std::filesystem::path& path, const BinningModel& m) {
  atomic_write(path, model_to_json(m).dump(2) + "\n");
}

BinningModel read_model(const std::filesystem::path& path) {
  return model_from_json(nlohmann::json::parse(read_file(path)));
}

std::string model_filename(const BinningModel& m) {
  return "model_" + m.landmark + "_" + measure_name(m.measure) + "_f" + std::to_string(m.fold) +
         "_q" + std::to_string(m.thresholds.q_bins) + ".json";
}

std::string render_assignment_csv(const std::vector<AssignmentRow>& rows) {
  std::string out = join_csv(kAssignmentColumns) + "\n";
  for (const auto& r : rows) {
    out += join_csv({r.uid, r.landmark, std::to_string(r.fold), measure_name(r.measure),
                     std::to_string(r.q_bins), std::to_string(r.bin), format_double(r.uncertainty),
                     opt_field(r.error), opt_field(r.lower_bound), opt_field(r.upper_bound)});
    out += '\n';
  }
  return out;
}

std::vector<AssignmentRow> parse_assignment_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("assignment CSV: missing header");
  HeaderIndex header = parse_header(line);
  for (const auto& required : kAssignmentColumns)
    if (required != "error" && required != "lower_bound" && required != "upper_bound" &&
        !header.find(required, {}))
      throw std::runtime_error("assignment CSV: missing column " + required);

  std::vector<AssignmentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    AssignmentRow r;
    r.uid = field_at(fields, header.find("uid", {}));
    r.landmark = field_at(fields, header.find("landmark", {}));
    r.fold = static_cast<int>(parse_double(field_at(fields, header.find("fold", {}))));
    r.measure = parse_measure(field_at(fields, header.find("measure", {})));
    r.q_bins = static_cast<int>(parse_double(field_at(fields, header.find("q", {}))));
    r.bin = static_cast<int>(parse_double(field_at(fields, header.find("bin", {}))));
    r.uncertainty = parse_double(field_at(fields, header.find("uncertainty", {})));
    r.error = parse_opt(field_at(fields, header.find("error", {})));
    r.lower_bound = parse_opt(field_at(fields, header.find("lower_bound", {})));
    r.upper_bound = parse_opt(field_at(fields, header.find("upper_bound", {})));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_assignment_csv(const std::filesystem::path& path, const std::vector<AssignmentRow>& rows) {
  atomic_write(path, render_assignment_csv(rows));
}

std::vector<AssignmentRow> read_assignment_csv(const std::filesystem::path& path) {
  return parse_assignment_csv(read_file(path));
}

}  // namespace qbin
