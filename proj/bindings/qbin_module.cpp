#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qbin/binning.hpp"
#include "qbin/evaluation.hpp"
#include "qbin/heatmap.hpp"
#include "qbin/heatmap_io.hpp"
#include "qbin/isotonic.hpp"
#include "qbin/measures.hpp"
#include "qbin/stats.hpp"
#include "qbin/synthetic.hpp"

namespace py = pybind11;
using namespace qbin;

namespace {

Heatmap heatmap_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("heatmap array must be 2-D");
  const int h = static_cast<int>(arr.shape(0));
  const int w = static_cast<int>(arr.shape(1));
  std::vector<double> vals(arr.data(), arr.data() + static_cast<std::size_t>(h) * w);
  return Heatmap(h, w, std::move(vals));
}

py::array_t<double> heatmap_to_array(const Heatmap& h) {
  py::array_t<double> out({h.height(), h.width()});
  auto vals = h.values();
  std::copy(vals.begin(), vals.end(), out.mutable_data());
  return out;
}

std::vector<Heatmap> ensemble_from_list(const std::vector<py::array_t<double>>& arrays) {
  std::vector<Heatmap> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(heatmap_from_array(a));
  return out;
}

std::vector<UncErrTuple> tuples_from_pairs(
    const std::vector<std::tuple<std::string, double, std::optional<double>>>& items) {
  std::vector<UncErrTuple> out;
  out.reserve(items.size());
  for (const auto& [id, unc, err] : items) out.push_back({id, unc, err});
  return out;
}

}  // namespace

PYBIND11_MODULE(_qbin, m) {
  m.doc() = "Quantile-binning uncertainty calibration for heatmap landmark predictions";

  py::class_<GaussianSpec>(m, "GaussianSpec")
      .def(py::init([](std::pair<double, double> center, double sigma_major, double sigma_minor,
                       double orientation, const std::string& amplitude) {
             GaussianSpec s;
             s.center = {center.first, center.second};
             s.sigma_major = sigma_major;
             s.sigma_minor = sigma_minor;
             s.orientation = orientation;
             s.amplitude = amplitude == "normalized" ? AmplitudeMode::Normalized : AmplitudeMode::PeakOne;
             return s;
           }),
           py::arg("center"), py::arg("sigma_major"), py::arg("sigma_minor") = -1.0,
           py::arg("orientation") = 0.0, py::arg("amplitude") = "peak_one")
      .def_readwrite("sigma_major", &GaussianSpec::sigma_major)
      .def_readwrite("sigma_minor", &GaussianSpec::sigma_minor)
      .def_readwrite("orientation", &GaussianSpec::orientation);

  m.def(
      "render_gaussian",
      [](const GaussianSpec& spec, int height, int width) {
        GaussianSpec s = spec;
        if (s.sigma_minor <= 0.0) s.sigma_minor = s.sigma_major;  // isotropic shorthand
        return heatmap_to_array(render_gaussian(s, height, width));
      },
      py::arg("spec"), py::arg("height"), py::arg("width"));

  m.def("argmax_coord", [](py::array_t<double> arr) {
    auto [pix, act] = argmax_coord(heatmap_from_array(arr));
    return py::make_tuple(py::make_tuple(pix.row, pix.col), act);
  });

  m.def("mean_heatmap", [](const std::vector<py::array_t<double>>& arrays) {
    return heatmap_to_array(mean_heatmap(ensemble_from_list(arrays)));
  });

  m.def(
      "s_mha",
      [](py::array_t<double> arr, double epsilon) {
        auto ex = s_mha(heatmap_from_array(arr), epsilon);
        return py::make_tuple(py::make_tuple(ex.coord.row, ex.coord.col), ex.uncertainty);
      },
      py::arg("heatmap"), py::arg("epsilon") = kDefaultEpsilon);
  m.def(
      "e_mha",
      [](const std::vector<py::array_t<double>>& arrays, double epsilon) {
        auto ex = e_mha(ensemble_from_list(arrays), epsilon);
        return py::make_tuple(py::make_tuple(ex.coord.row, ex.coord.col), ex.uncertainty);
      },
      py::arg("ensemble"), py::arg("epsilon") = kDefaultEpsilon);
  m.def("e_cpv", [](const std::vector<py::array_t<double>>& arrays) {
    auto ex = e_cpv(ensemble_from_list(arrays));
    return py::make_tuple(py::make_tuple(ex.coord.row, ex.coord.col), ex.uncertainty);
  });

  m.def(
      "localization_error",
      [](std::pair<double, double> pred, std::pair<double, double> truth, double spacing) {
        return localization_error({pred.first, pred.second}, {truth.first, truth.second}, spacing);
      },
      py::arg("pred"), py::arg("truth"), py::arg("pixel_spacing_mm") = 1.0);

  py::class_<QuantileThresholds>(m, "QuantileThresholds")
      .def_readonly("q_bins", &QuantileThresholds::q_bins)
      .def_readonly("alphas", &QuantileThresholds::alphas)
      .def_readonly("fit_count", &QuantileThresholds::fit_count)
      .def("to_json", [](const QuantileThresholds& t) { return thresholds_to_json(t).dump(); });

  m.def(
      "fit_thresholds",
      [](const std::vector<std::tuple<std::string, double, std::optional<double>>>& tuples, int q) {
        return fit_thresholds(tuples_from_pairs(tuples), q);
      },
      py::arg("validation"), py::arg("q"));
  m.def("assign_bin", &assign_bin, py::arg("thresholds"), py::arg("uncertainty"));

  py::class_<IsotonicFit>(m, "IsotonicFit")
      .def_readonly("knots_x", &IsotonicFit::knots_x)
      .def_readonly("knots_y", &IsotonicFit::knots_y);

  m.def(
      "fit_isotonic",
      [](const std::vector<double>& x, const std::vector<double>& y,
         const std::vector<double>& w) { return fit_isotonic(x, y, w); },
      py::arg("x"), py::arg("y"), py::arg("weights") = std::vector<double>{});
  m.def("eval_isotonic", &eval_isotonic, py::arg("fit"), py::arg("x"));

  py::class_<ErrorBounds>(m, "ErrorBounds")
      .def_readonly("q_bins", &ErrorBounds::q_bins)
      .def_readonly("gammas", &ErrorBounds::gammas);
  m.def("estimate_bounds", &estimate_bounds, py::arg("fit"), py::arg("thresholds"));

  m.def(
      "spearman_rho",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        auto r = spearman_rho(x, y);
        return py::make_tuple(r.rho, r.p_value);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "significance_test",
      [](const std::vector<double>& a, const std::vector<double>& b, bool paired) {
        auto r = significance_test(a, b, paired);
        return py::make_tuple(r.t, r.p, r.significant_at_0_05);
      },
      py::arg("a"), py::arg("b"), py::arg("paired") = false);

  m.def(
      "cumulative_error_curve",
      [](const std::vector<double>& errors, const std::vector<double>& thresholds) {
        return cumulative_error_curve(errors, thresholds);
      },
      py::arg("errors"), py::arg("thresholds"));

  m.def(
      "jaccard_per_bin",
      [](const std::vector<std::vector<std::string>>& predicted,
         const std::vector<std::vector<std::string>>& truth) {
        GroundTruthBins gt;
        gt.q_bins = static_cast<int>(truth.size());
        gt.members = truth;
        return jaccard_per_bin(predicted, gt);
      },
      py::arg("predicted"), py::arg("truth"));

  py::class_<AleatoricSpec>(m, "AleatoricSpec")
      .def(py::init<>())
      .def_readwrite("sigma_major", &AleatoricSpec::sigma_major)
      .def_readwrite("sigma_minor", &AleatoricSpec::sigma_minor)
      .def_readwrite("orientation", &AleatoricSpec::orientation);

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("seed", &SyntheticConfig::seed)
      .def_readwrite("n_images", &SyntheticConfig::n_images)
      .def_readwrite("height", &SyntheticConfig::height)
      .def_readwrite("width", &SyntheticConfig::width)
      .def_readwrite("ensemble_size", &SyntheticConfig::ensemble_size)
      .def_readwrite("peak_sigma", &SyntheticConfig::peak_sigma)
      .def_readwrite("epistemic_jitter_sigma", &SyntheticConfig::epistemic_jitter_sigma)
      .def_readwrite("aleatoric", &SyntheticConfig::aleatoric)
      .def_readwrite("outlier_rate", &SyntheticConfig::outlier_rate)
      .def_readwrite("outlier_displacement", &SyntheticConfig::outlier_displacement);

  m.def(
      "end_to_end_synthetic",
      [](const SyntheticConfig& cfg, int q, const std::string& measure) {
        auto rep = end_to_end_synthetic(cfg, q, parse_measure(measure));
        return report_to_json(rep).dump();
      },
      py::arg("config"), py::arg("q"), py::arg("measure"));

  m.def("write_qbhm",
        [](const std::filesystem::path& path, py::array_t<double> arr) {
          write_qbhm(path, heatmap_from_array(arr));
        });
  m.def("read_qbhm",
        [](const std::filesystem::path& path) { return heatmap_to_array(read_qbhm(path)); });
}
