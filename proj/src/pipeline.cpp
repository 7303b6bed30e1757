#include "qbin/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "qbin/heatmap_io.hpp"
#include "qbin/rng.hpp"
#include "qbin/util.hpp"

namespace qbin {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

struct ManifestRow {
  std::string uid;
  std::string landmark = "l0";
  int fold = 0;
  Split split = Split::Test;
  int member = 0;
  std::string path;
  std::optional<double> gt_row, gt_col;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("manifest: missing header");
  auto header = split_csv_line(line);
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
  auto get = [&](const std::vector<std::string>& fields, const std::string& name) -> std::string {
    auto it = idx.find(name);
    if (it == idx.end() || it->second >= fields.size()) return {};
    return fields[it->second];
  };
  for (const char* required : {"uid", "member", "path"})
    if (!idx.count(required))
      throw std::runtime_error(std::string("manifest: missing column ") + required);

  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    ManifestRow r;
    r.uid = get(fields, "uid");
    auto lm = get(fields, "landmark");
    if (!lm.empty()) r.landmark = lm;
    auto fold = get(fields, "fold");
    if (!fold.empty()) r.fold = static_cast<int>(parse_double(fold));
    auto split = get(fields, "split");
    if (!split.empty()) r.split = parse_split(split);
    r.member = static_cast<int>(parse_double(get(fields, "member")));
    r.path = get(fields, "path");
    auto gr = get(fields, "gt_row");
    auto gc = get(fields, "gt_col");
    if (!gr.empty()) r.gt_row = parse_double(gr);
    if (!gc.empty()) r.gt_col = parse_double(gc);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

void finalize_result(CommandResult& result, const RunConfig& cfg, const std::string& stage) {
  if (result.failures.empty()) return;
  std::string out = "stage,key,reason\n";
  for (const auto& f : result.failures) out += join_csv({f.stage, f.key, f.reason}) + "\n";
  const auto path = cfg.out_dir / (stage + "_failures.csv");
  atomic_write(path, out);
  result.outputs.push_back(path);
  result.exit_code = 2;
}

CommandResult cmd_simulate(const SyntheticConfig& synth, const RunConfig& cfg,
                           const std::string& format, double validation_fraction) {
  if (format != "qbhm" && format != "csv")
    throw std::invalid_argument("simulate: format must be qbhm or csv");
  if (validation_fraction < 0.0 || validation_fraction > 1.0)
    throw std::invalid_argument("simulate: validation fraction must be in [0, 1]");

  CommandResult result;
  auto cases = generate_cases(synth, cfg.workers);
  const std::string ext = format == "qbhm" ? ".qbhm" : ".csv";
  const auto heatmap_dir = cfg.out_dir / "heatmaps";
  std::filesystem::create_directories(heatmap_dir);

  std::string manifest =
      "uid,landmark,fold,split,member,path,gt_row,gt_col,true_row,true_col,outlier\n";
  const std::size_t n_val =
      static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(cases.size())));
  int clamped = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    clamped += c.clamped_members;
    const std::string split = i < n_val ? "validation" : "test";
    for (std::size_t t = 0; t < c.ensemble.size(); ++t) {
      const std::string name = c.id + "_m" + std::to_string(t) + ext;
      const auto path = heatmap_dir / name;
      if (format == "qbhm")
        write_qbhm(path, c.ensemble[t]);
      else
        write_heatmap_csv(path, c.ensemble[t]);
      manifest += join_csv({c.id, "l0", "0", split, std::to_string(t),
                            "heatmaps/" + name, format_double(c.annotated_coord.row),
                            format_double(c.annotated_coord.col), format_double(c.true_coord.row),
                            format_double(c.true_coord.col), c.outlier ? "1" : "0"});
      manifest += '\n';
    }
  }
  const auto manifest_path = cfg.out_dir / "manifest.csv";
  atomic_write(manifest_path, manifest);
  result.outputs.push_back(manifest_path);
  if (clamped > 0)
    result.warnings.push_back("simulate: clamped " + std::to_string(clamped) +
                              " peaks to the grid after redraw retries");
  return result;
}

CommandResult cmd_extract(const std::filesystem::path& manifest_path, const RunConfig& cfg) {
  CommandResult result;
  auto manifest = read_manifest(manifest_path);
  const auto base_dir = manifest_path.parent_path();

  // Group by (landmark, uid), canonical order.
  std::map<std::pair<std::string, std::string>, std::vector<ManifestRow>> groups;
  for (auto& r : manifest) groups[{r.landmark, r.uid}].push_back(r);

  std::vector<TupleTableRow> rows;
  for (auto& [key, members] : groups) {
    const std::string group_key = key.first + "/" + key.second;
    std::sort(members.begin(), members.end(),
              [](const ManifestRow& a, const ManifestRow& b) { return a.member < b.member; });
    bool members_ok = true;
    for (std::size_t t = 0; t < members.size(); ++t)
      if (members[t].member != static_cast<int>(t)) members_ok = false;
    if (!members_ok) {
      result.failures.push_back({"extract", group_key, "member indices not contiguous from 0"});
      continue;
    }

    std::vector<Heatmap> ensemble;
    std::string load_error;
    for (const auto& m : members) {
      std::filesystem::path p = m.path;
      if (p.is_relative()) p = base_dir / p;
      try {
        ensemble.push_back(read_heatmap(p));
      } catch (const std::exception& e) {
        load_error = e.what();
        break;
      }
    }
    if (!load_error.empty()) {
      result.failures.push_back({"extract", group_key, load_error});
      continue;
    }
    const int h = ensemble.front().height();
    const int w = ensemble.front().width();
    bool shape_ok = std::all_of(ensemble.begin(), ensemble.end(), [&](const Heatmap& m) {
      return m.height() == h && m.width() == w;
    });
    if (!shape_ok) {
      result.failures.push_back({"extract", group_key, "heatmap shape mismatch across ensemble"});
      continue;
    }

    std::optional<RealCoord> gt;
    if (members.front().gt_row && members.front().gt_col)
      gt = RealCoord{*members.front().gt_row, *members.front().gt_col};

    int member_index = cfg.member_index;
    if (cfg.member_random)
      member_index = static_cast<int>(Rng(mix_seed(cfg.seed, fnv1a(group_key))).next_u64() %
                                      ensemble.size());

    for (Measure measure : cfg.measures) {
      Extraction ex;
      try {
        switch (measure) {
          case Measure::SMHA: {
            if (member_index < 0 || member_index >= static_cast<int>(ensemble.size()))
              throw std::invalid_argument("member index out of range");
            ex = s_mha(ensemble[static_cast<std::size_t>(member_index)], cfg.epsilon);
            break;
          }
          case Measure::EMHA:
            ex = e_mha(ensemble, cfg.epsilon);
            break;
          case Measure::ECPV:
            ex = e_cpv(ensemble);
            break;
        }
      } catch (const std::exception& e) {
        result.failures.push_back({"extract", group_key + "/" + measure_name(measure), e.what()});
        continue;
      }
      TupleTableRow row;
      row.uid = key.second;
      row.landmark = key.first;
      row.fold = members.front().fold;
      row.split = members.front().split;
      row.measure = measure;
      row.uncertainty = ex.uncertainty;
      row.pred_row = ex.coord.row;
      row.pred_col = ex.coord.col;
      if (gt) {
        row.gt_row = gt->row;
        row.gt_col = gt->col;
        row.error = localization_error(ex.coord, *gt, cfg.pixel_spacing_mm);
      }
      rows.push_back(std::move(row));
    }
  }

  const auto out_path = cfg.out_dir / "tuples.csv";
  write_tuple_csv(out_path, rows);
  result.outputs.push_back(out_path);
  finalize_result(result, cfg, "extract");
  return result;
}

namespace {

using GroupKey = std::tuple<std::string, Measure, int>;  // landmark, measure, fold

std::map<GroupKey, std::vector<TupleTableRow>> group_rows(const std::vector<TupleTableRow>& rows,
                                                          bool pool_landmarks, Split split) {
  std::map<GroupKey, std::vector<TupleTableRow>> groups;
  for (const auto& r : rows) {
    if (r.split != split) continue;
    groups[{pool_landmarks ? "*" : r.landmark, r.measure, r.fold}].push_back(r);
  }
  return groups;
}

std::string group_label(const GroupKey& key, int q) {
  return std::get<0>(key) + "/" + measure_name(std::get<1>(key)) + "/f" +
         std::to_string(std::get<2>(key)) + "/q" + std::to_string(q);
}

// Optional carve-out: move the last fraction of each group's validation-less
// rows into the validation split.
void apply_holdout(std::vector<TupleTableRow>& rows, double fraction) {
  if (fraction <= 0.0) return;
  std::map<GroupKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].split == Split::Test) groups[{rows[i].landmark, rows[i].measure, rows[i].fold}].push_back(i);
  for (auto& [key, indices] : groups) {
    const std::size_t n_hold =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(indices.size())));
    for (std::size_t k = 0; k < n_hold && k < indices.size(); ++k)
      rows[indices[k]].split = Split::Validation;
  }
}

}  // namespace

CommandResult cmd_fit(const std::filesystem::path& tuples_path, const RunConfig& cfg) {
  CommandResult result;
  auto rows = read_tuple_csv(tuples_path, cfg.column_map);
  apply_holdout(rows, cfg.holdout_fraction);
  auto groups = group_rows(rows, cfg.pool_landmarks, Split::Validation);
  if (groups.empty()) throw std::runtime_error("fit: no validation rows in " + tuples_path.string());

  const auto models_dir = cfg.out_dir / "models";
  std::filesystem::create_directories(models_dir);
  for (const auto& [key, group] : groups) {
    std::vector<UncErrTuple> tuples;
    bool missing_error = false;
    for (const auto& r : group) {
      if (!r.error) {
        missing_error = true;
        break;
      }
      tuples.push_back({r.uid, r.uncertainty, r.error});
    }
    for (int q : cfg.q_values) {
      const std::string label = group_label(key, q);
      if (missing_error) {
        result.failures.push_back({"fit", label, "validation row lacks an error value"});
        continue;
      }
      if (static_cast<int>(tuples.size()) < q) {
        result.failures.push_back(
            {"fit", label, "insufficient validation rows: " + std::to_string(tuples.size())});
        continue;
      }
      BinningModel model;
      model.landmark = std::get<0>(key);
      model.measure = std::get<1>(key);
      model.fold = std::get<2>(key);
      model.thresholds = fit_thresholds(tuples, q);
      model.isotonic = fit_isotonic(tuples);
      model.bounds = estimate_bounds(model.isotonic, model.thresholds);
      if (has_tied_uncertainties(tuples))
        result.warnings.push_back("fit " + label +
                                  ": tied uncertainties; interval assignment may skew occupancy");
      const auto path = models_dir / model_filename(model);
      write_model(path, model);
      result.outputs.push_back(path);
    }
  }
  finalize_result(result, cfg, "fit");
  return result;
}

CommandResult cmd_bin(const std::filesystem::path& tuples_path,
                      const std::filesystem::path& models_dir, const RunConfig& cfg) {
  CommandResult result;
  auto rows = read_tuple_csv(tuples_path, cfg.column_map);
  apply_holdout(rows, cfg.holdout_fraction);

  std::map<std::tuple<std::string, Measure, int, int>, BinningModel> models;
  for (const auto& entry : std::filesystem::directory_iterator(models_dir)) {
    if (entry.path().extension() != ".json") continue;
    BinningModel m = read_model(entry.path());
    models[{m.landmark, m.measure, m.fold, m.thresholds.q_bins}] = m;
  }
  if (models.empty()) throw std::runtime_error("bin: no models found in " + models_dir.string());

  std::vector<AssignmentRow> out;
  for (const auto& r : rows) {
    if (r.split != Split::Test) continue;
    for (int q : cfg.q_values) {
      const std::string landmark = cfg.pool_landmarks ? "*" : r.landmark;
      auto it = models.find({landmark, r.measure, r.fold, q});
      if (it == models.end() && !cfg.pool_landmarks)
        it = models.find({"*", r.measure, r.fold, q});  // pooled fallback
      const std::string label =
          r.uid + "/" + landmark + "/" + measure_name(r.measure) + "/f" + std::to_string(r.fold) +
          "/q" + std::to_string(q);
      if (it == models.end()) {
        result.failures.push_back({"bin", label, "no model for this group"});
        continue;
      }
      const BinningModel& m = it->second;
      AssignmentRow a;
      a.uid = r.uid;
      a.landmark = r.landmark;
      a.fold = r.fold;
      a.measure = r.measure;
      a.q_bins = q;
      a.bin = assign_bin(m.thresholds, r.uncertainty);
      a.uncertainty = r.uncertainty;
      a.error = r.error;
      if (a.bin > 1) a.lower_bound = m.bounds.gammas[static_cast<std::size_t>(a.bin - 1)];
      if (a.bin < q) a.upper_bound = m.bounds.gammas[static_cast<std::size_t>(a.bin)];
      out.push_back(std::move(a));
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const AssignmentRow& a, const AssignmentRow& b) {
    return std::tie(a.landmark, a.measure, a.fold, a.q_bins, a.uid) <
           std::tie(b.landmark, b.measure, b.fold, b.q_bins, b.uid);
  });
  const auto out_path = cfg.out_dir / "assignments.csv";
  write_assignment_csv(out_path, out);
  result.outputs.push_back(out_path);
  finalize_result(result, cfg, "bin");
  return result;
}

namespace {

std::vector<double> bound_accuracy_from_rows(const std::vector<AssignmentRow>& rows, int q_bins) {
  std::vector<int> hits(static_cast<std::size_t>(q_bins), 0), counts(static_cast<std::size_t>(q_bins), 0);
  for (const auto& r : rows) {
    const std::size_t q = static_cast<std::size_t>(r.bin - 1);
    ++counts[q];
    const double err = *r.error;
    const bool lo_ok = !r.lower_bound || err >= *r.lower_bound;
    const bool hi_ok = !r.upper_bound || err < *r.upper_bound;
    if (lo_ok && hi_ok) ++hits[q];
  }
  std::vector<double> out(static_cast<std::size_t>(q_bins),
                          std::numeric_limits<double>::quiet_NaN());
  for (int q = 0; q < q_bins; ++q)
    if (counts[static_cast<std::size_t>(q)])
      out[static_cast<std::size_t>(q)] =
          static_cast<double>(hits[static_cast<std::size_t>(q)]) / counts[static_cast<std::size_t>(q)];
  return out;
}

}  // namespace

CommandResult cmd_evaluate(const std::filesystem::path& assignments_path, const RunConfig& cfg) {
  CommandResult result;
  auto rows = read_assignment_csv(assignments_path);
  if (rows.empty()) throw std::runtime_error("evaluate: empty assignment table");
  for (const auto& r : rows)
    if (!r.error)
      throw std::runtime_error("evaluate: assignment row " + r.uid + " lacks a ground-truth error");

  std::set<int> q_values;
  for (const auto& r : rows) q_values.insert(r.q_bins);

  for (int q : q_values) {
    nlohmann::json report_json;
    report_json["q"] = q;
    std::string table = "measure,subset,mean_error_mm,sd_error_mm,n\n";
    std::string bins_csv =
        "measure,bin,mean_jaccard,sd_jaccard,mean_bound_accuracy,sd_bound_accuracy,"
        "mean_error_mm,sd_error_mm,mean_count\n";
    std::string cdf_csv = "measure,threshold_mm,fraction_all,fraction_b1\n";

    std::map<Measure, std::vector<AssignmentRow>> by_measure;
    for (const auto& r : rows)
      if (r.q_bins == q) by_measure[r.measure].push_back(r);

    for (const auto& [measure, mrows] : by_measure) {
      // one evaluation unit per (landmark, fold)
      std::map<std::pair<std::string, int>, std::vector<AssignmentRow>> units;
      for (const auto& r : mrows) units[{r.landmark, r.fold}].push_back(r);

      std::vector<FoldMetrics> fold_metrics;
      std::vector<AssignedError> pooled;
      for (const auto& [unit, urows] : units) {
        FoldMetrics fm;
        fm.fold = unit.second;
        fm.bound_accuracy = bound_accuracy_from_rows(urows, q);
        fm.bin_count.assign(static_cast<std::size_t>(q), 0);
        std::vector<double> sums(static_cast<std::size_t>(q), 0.0);
        std::vector<std::vector<std::string>> predicted(static_cast<std::size_t>(q));
        std::vector<UncErrTuple> tuples;
        for (const auto& r : urows) {
          const std::size_t b = static_cast<std::size_t>(r.bin - 1);
          ++fm.bin_count[b];
          sums[b] += *r.error;
          predicted[b].push_back(r.uid);
          tuples.push_back({r.uid, r.uncertainty, r.error});
          pooled.push_back({r.uid, r.bin, r.uncertainty, *r.error, r.fold});
        }
        fm.bin_mean_error.assign(static_cast<std::size_t>(q),
                                 std::numeric_limits<double>::quiet_NaN());
        for (int b = 0; b < q; ++b)
          if (fm.bin_count[static_cast<std::size_t>(b)])
            fm.bin_mean_error[static_cast<std::size_t>(b)] =
                sums[static_cast<std::size_t>(b)] / fm.bin_count[static_cast<std::size_t>(b)];
        if (static_cast<int>(urows.size()) < q) {
          result.failures.push_back({"evaluate",
                                     unit.first + "/f" + std::to_string(unit.second) + "/" +
                                         measure_name(measure) + "/q" + std::to_string(q),
                                     "fewer rows than bins; unit skipped"});
          continue;
        }
        fm.jaccard = jaccard_per_bin(predicted, ground_truth_bins(tuples, q));
        fold_metrics.push_back(std::move(fm));
      }
      if (fold_metrics.empty()) continue;

      AggregateOptions opts;
      opts.q_bins = q;
      opts.cdf_thresholds = cfg.cdf_thresholds;
      opts.pooled_correlation = !cfg.per_fold_correlation;
      EvaluationReport rep = aggregate_folds(fold_metrics, pooled, opts);
      report_json["measures"][measure_name(measure)] = report_to_json(rep);

      auto stat = [&](double v) { return std::isnan(v) ? std::string{} : format_double(v); };
      table += join_csv({measure_name(measure), "All", stat(rep.all_mean_error),
                         stat(rep.all_sd_error), std::to_string(pooled.size())}) + "\n";
      std::size_t n_b1 = 0;
      for (const auto& p : pooled)
        if (p.bin == 1) ++n_b1;
      table += join_csv({measure_name(measure), "B1", stat(rep.b1_mean_error),
                         stat(rep.b1_sd_error), std::to_string(n_b1)}) + "\n";
      for (int b = 0; b < q; ++b) {
        const auto i = static_cast<std::size_t>(b);
        bins_csv += join_csv({measure_name(measure), std::to_string(b + 1),
                              stat(rep.mean_jaccard[i]), stat(rep.sd_jaccard[i]),
                              stat(rep.mean_bound_accuracy[i]), stat(rep.sd_bound_accuracy[i]),
                              stat(rep.mean_bin_error[i]), stat(rep.sd_bin_error[i]),
                              stat(rep.mean_bin_count[i])}) + "\n";
      }
      for (std::size_t i = 0; i < rep.cdf.thresholds.size(); ++i)
        cdf_csv += join_csv({measure_name(measure), format_double(rep.cdf.thresholds[i]),
                             format_double(rep.cdf.all_fraction[i]),
                             format_double(rep.cdf.b1_fraction[i])}) + "\n";
    }

    const std::string suffix = "_q" + std::to_string(q);
    const auto json_path = cfg.out_dir / ("report" + suffix + ".json");
    atomic_write(json_path, report_json.dump(2) + "\n");
    atomic_write(cfg.out_dir / ("table" + suffix + ".csv"), table);
    atomic_write(cfg.out_dir / ("bins" + suffix + ".csv"), bins_csv);
    atomic_write(cfg.out_dir / ("cdf" + suffix + ".csv"), cdf_csv);
    result.outputs.push_back(json_path);
    result.outputs.push_back(cfg.out_dir / ("table" + suffix + ".csv"));
    result.outputs.push_back(cfg.out_dir / ("bins" + suffix + ".csv"));
    result.outputs.push_back(cfg.out_dir / ("cdf" + suffix + ".csv"));
  }
  finalize_result(result, cfg, "evaluate");
  return result;
}

std::string cmd_report(const std::filesystem::path& report_json_path) {
  auto j = nlohmann::json::parse(read_file(report_json_path));
  std::ostringstream out;
  out << "Q = " << j.at("q").get<int>() << "\n";
  if (!j.contains("measures")) return out.str();
  for (auto it = j["measures"].begin(); it != j["measures"].end(); ++it) {
    const auto& m = it.value();
    out << "\n[" << it.key() << "]\n";
    auto num = [](const nlohmann::json& v) { return v.is_null() ? std::string("n/a") : format_double(v.get<double>()); };
    out << "  All error (mm): " << num(m.at("all_mean_error")) << " +/- "
        << num(m.at("all_sd_error")) << "\n";
    out << "  B1  error (mm): " << num(m.at("b1_mean_error")) << " +/- "
        << num(m.at("b1_sd_error")) << "\n";
    out << "  Spearman rho: " << num(m.at("spearman_rho")) << " (p = " << num(m.at("spearman_p"))
        << ")\n";
    out << "  Jaccard by bin:";
    for (const auto& v : m.at("mean_jaccard")) out << ' ' << num(v);
    out << "\n  Bound accuracy by bin:";
    for (const auto& v : m.at("mean_bound_accuracy")) out << ' ' << num(v);
    out << "\n";
  }
  return out.str();
}

}  // namespace qbin
