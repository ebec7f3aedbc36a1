#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "flairkit/cohort.hpp"
#include "flairkit/components.hpp"
#include "flairkit/config.hpp"
#include "flairkit/evaluate.hpp"
#include "flairkit/metrics.hpp"
#include "flairkit/nifti.hpp"
#include "flairkit/oracle.hpp"
#include "flairkit/phantom.hpp"
#include "flairkit/postprocess.hpp"
#include "flairkit/preprocess.hpp"
#include "flairkit/sliding_window.hpp"
#include "flairkit/stats.hpp"

namespace py = pybind11;
using namespace flairkit;

namespace {

// Volumes cross the boundary as Fortran-ordered (X, Y, Z) arrays so the
// buffer layout matches the x-fastest voxel order.
template <class T>
using FArray = py::array_t<T, py::array::f_style | py::array::forcecast>;

Geometry geometry_of(const py::buffer_info& info, const Vec3& spacing, const Vec3& origin) {
  if (info.ndim != 3) throw py::value_error("expected a 3-D array");
  Geometry g;
  g.dims = {info.shape[0], info.shape[1], info.shape[2]};
  g.spacing = spacing;
  g.origin = origin;
  g.validate();
  return g;
}

template <class GridT, class T>
GridT to_grid(const FArray<T>& a, const Vec3& spacing, const Vec3& origin) {
  const auto info = a.request();
  const Geometry g = geometry_of(info, spacing, origin);
  const T* p = static_cast<const T*>(info.ptr);
  std::vector<typename GridT::value_type> data(p, p + g.voxel_count());
  return GridT(g, std::move(data));
}

BinaryMask to_mask(const FArray<std::uint8_t>& a, const Vec3& spacing, const Vec3& origin) {
  BinaryMask m = to_grid<BinaryMask>(a, spacing, origin);
  for (auto& v : m.values()) v = v ? 1 : 0;
  return m;
}

template <class GridT>
py::array to_numpy(const GridT& grid) {
  using T = typename GridT::value_type;
  const Index3& d = grid.dims();
  const std::vector<py::ssize_t> shape{d[0], d[1], d[2]};
  const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(T)), static_cast<py::ssize_t>(sizeof(T) * d[0]),
                                         static_cast<py::ssize_t>(sizeof(T) * d[0] * d[1])};
  py::array_t<T> out(shape, strides);
  std::copy(grid.values().begin(), grid.values().end(), out.mutable_data());
  return out;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict evaluation_dict(const CaseEvaluation& ev) {
  py::dict d;
  d["outcome"] = to_string(ev.classification.outcome);
  d["gt_ml"] = ev.classification.gt_ml;
  d["pred_ml"] = ev.classification.pred_ml;
  d["voxel_dice"] = ev.classification.voxel_dice;
  if (ev.object) {
    d["dice"] = ev.object->dice;
    d["recall"] = ev.object->recall;
    d["precision"] = ev.object->precision;
    d["hd95_mm"] = ev.object->hd95_mm;
  }
  if (ev.delta) {
    d["direction"] = to_string(ev.delta->direction);
    d["delta_ml"] = ev.delta->delta_ml;
  }
  return d;
}

struct LabelTag {};
using LabelVolume = Grid<std::uint32_t, LabelTag>;

const Vec3 kUnit{1.0, 1.0, 1.0};
const Vec3 kZero{0.0, 0.0, 0.0};

}  // namespace

PYBIND11_MODULE(_flairkit, m) {
  m.doc() = "FLAIR hyperintensity segmentation pipeline: preprocessing, inference plumbing and evaluation";

  // Translators are tried newest first, so the base class goes in first.
  py::register_exception<Error>(m, "FlairkitError", PyExc_RuntimeError);
  py::register_exception<NiftiError>(m, "NiftiError", PyExc_IOError);
  py::register_exception<GeometryMismatch>(m, "GeometryMismatch", PyExc_ValueError);

  m.def("default_config", [] { return to_python(nlohmann::json(Config{})); });

  m.def(
      "load_volume",
      [](const std::filesystem::path& path) {
        const ScalarVolume v = load_volume(path);
        return py::make_tuple(to_numpy(v), v.spacing(), v.geometry().origin);
      },
      py::arg("path"), "Returns (array, spacing, origin).");
  m.def(
      "save_volume",
      [](const std::filesystem::path& path, const FArray<float>& a, const Vec3& spacing, const Vec3& origin) {
        save_volume(to_grid<ScalarVolume>(a, spacing, origin), path);
      },
      py::arg("path"), py::arg("array"), py::arg("spacing") = kUnit, py::arg("origin") = kZero);
  m.def(
      "save_mask",
      [](const std::filesystem::path& path, const FArray<std::uint8_t>& a, const Vec3& spacing, const Vec3& origin) {
        save_volume(to_mask(a, spacing, origin), path);
      },
      py::arg("path"), py::arg("array"), py::arg("spacing") = kUnit, py::arg("origin") = kZero);

  m.def(
      "resample",
      [](const FArray<float>& a, const Vec3& spacing, const Vec3& target, bool linear) {
        const auto v = to_grid<ScalarVolume>(a, spacing, kZero);
        return to_numpy(resample_isotropic(v, target, linear ? Interpolation::Linear : Interpolation::Nearest));
      },
      py::arg("array"), py::arg("spacing"), py::arg("target_spacing") = kUnit, py::arg("linear") = true);
  m.def(
      "preprocess",
      [](const FArray<float>& a, const Vec3& spacing, const py::object& config) {
        PreprocessConfig cfg;
        if (!config.is_none()) cfg = from_python(config).get<PreprocessConfig>();
        const auto r = preprocess_pipeline(to_grid<ScalarVolume>(a, spacing, kZero), cfg);
        return py::make_tuple(to_numpy(r.volume), to_python(nlohmann::json(r.meta)));
      },
      py::arg("array"), py::arg("spacing") = kUnit, py::arg("config") = py::none(),
      "Returns (array, meta dict).");
  m.def(
      "normalize_nonzero",
      [](const FArray<float>& a) { return to_numpy(normalize_nonzero(to_grid<ScalarVolume>(a, kUnit, kZero))); },
      py::arg("array"));
  m.def(
      "clip_intensities",
      [](const FArray<float>& a, double lo, double hi) {
        return to_numpy(clip_intensities(to_grid<ScalarVolume>(a, kUnit, kZero), lo, hi));
      },
      py::arg("array"), py::arg("low_pct") = 0.0, py::arg("high_pct") = 99.5);

  m.def(
      "plan_tiles",
      [](const Index3& dims, const Index3& patch, double overlap) {
        const TileGrid g = plan_tiles(dims, patch, overlap);
        py::dict d;
        d["windows"] = g.windows;
        d["stride"] = g.stride;
        d["pad_before"] = g.pad_before;
        d["padded_dims"] = g.padded_dims;
        return d;
      },
      py::arg("dims"), py::arg("patch_size") = Index3{160, 160, 160}, py::arg("overlap") = 0.5);
  m.def(
      "infer",
      [](const FArray<float>& a, const std::string& predictor, const Index3& patch, double overlap) {
        const auto v = to_grid<ScalarVolume>(a, kUnit, kZero);
        const auto p = make_predictor(predictor, {});
        return to_numpy(stitch(v, *p, plan_tiles(v.dims(), patch, overlap)));
      },
      py::arg("array"), py::arg("predictor"), py::arg("patch_size") = Index3{160, 160, 160},
      py::arg("overlap") = 0.5);

  m.def(
      "binarize",
      [](const FArray<float>& prob, double threshold) {
        return to_numpy(binarize(to_grid<ProbabilityMap>(prob, kUnit, kZero), threshold));
      },
      py::arg("prob"), py::arg("threshold"));
  m.def(
      "connected_components",
      [](const FArray<std::uint8_t>& mask, int connectivity) {
        if (connectivity != 6 && connectivity != 26) throw py::value_error("connectivity must be 6 or 26");
        const auto cc = connected_components(to_mask(mask, kUnit, kZero), static_cast<Connectivity>(connectivity));
        return to_numpy(LabelVolume(cc.geometry, cc.labels));
      },
      py::arg("mask"), py::arg("connectivity") = 26);
  m.def(
      "filter_small_components",
      [](const FArray<std::uint8_t>& mask, const Vec3& spacing, double min_ml, int min_slices) {
        ComponentFilter f;
        f.min_ml = min_ml;
        f.min_consecutive_slices = min_slices;
        return to_numpy(filter_small_components(to_mask(mask, spacing, kZero), f));
      },
      py::arg("mask"), py::arg("spacing") = kUnit, py::arg("min_ml") = 0.05, py::arg("min_consecutive_slices") = 2);

  m.def(
      "dice",
      [](const FArray<std::uint8_t>& a, const FArray<std::uint8_t>& b) {
        return voxelwise_dice(to_mask(a, kUnit, kZero), to_mask(b, kUnit, kZero));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "hd95",
      [](const FArray<std::uint8_t>& a, const FArray<std::uint8_t>& b, const Vec3& spacing) {
        return hd95(to_mask(a, spacing, kZero), to_mask(b, spacing, kZero));
      },
      py::arg("a"), py::arg("b"), py::arg("spacing") = kUnit);
  m.def(
      "evaluate_case",
      [](const FArray<float>& prob, const FArray<std::uint8_t>& gt, const Vec3& spacing, double threshold) {
        const auto p = to_grid<ProbabilityMap>(prob, spacing, kZero);
        const auto g = to_mask(gt, spacing, kZero);
        const double t[] = {threshold};
        return evaluation_dict(evaluate_thresholds(p, g, t, EvaluationRules{}).front());
      },
      py::arg("prob"), py::arg("gt"), py::arg("spacing") = kUnit, py::arg("threshold") = 0.5);

  m.def(
      "percentile",
      [](std::vector<double> values, double p) { return percentile(values, p); }, py::arg("values"), py::arg("p"));
  m.def(
      "median_iqr",
      [](std::vector<double> values) -> py::object {
        const auto r = median_iqr(values);
        if (!r) return py::none();
        return py::make_tuple(r->median, r->q1, r->q3, format_median_iqr(*r));
      },
      py::arg("values"));

  m.def(
      "stratified_split",
      [](const std::filesystem::path& manifest, int k, std::uint64_t seed) {
        return to_python(nlohmann::json(stratified_split(read_manifest(manifest), k, seed)));
      },
      py::arg("manifest"), py::arg("k") = 5, py::arg("seed") = 0);
  m.def(
      "evaluate_manifest",
      [](const std::filesystem::path& manifest, const std::filesystem::path& out_dir, std::uint64_t seed) {
        Config config;
        config.seed = seed;
        const auto result = run_evaluation(read_manifest(manifest), std::nullopt, config, manifest.parent_path());
        write_evaluation(result, config, out_dir);
        return result.complete();
      },
      py::arg("manifest"), py::arg("out_dir"), py::arg("seed") = 0,
      "Runs the evaluation without a fold plan; returns True when every case was evaluated.");

  m.def(
      "make_phantom",
      [](const py::object& spec) {
        const Phantom p = make_phantom(from_python(spec).get<PhantomSpec>());
        return py::make_tuple(to_numpy(p.volume), to_numpy(p.mask));
      },
      py::arg("spec"), "Returns (volume, mask).");

  auto oracle = m.def_submodule("oracle", "Brute-force references for small masks");
  oracle.def(
      "dice",
      [](const FArray<std::uint8_t>& a, const FArray<std::uint8_t>& b) {
        return oracle::dice(to_mask(a, kUnit, kZero), to_mask(b, kUnit, kZero));
      },
      py::arg("a"), py::arg("b"));
  oracle.def(
      "hd95",
      [](const FArray<std::uint8_t>& a, const FArray<std::uint8_t>& b, const Vec3& spacing) {
        return oracle::hd95(to_mask(a, spacing, kZero), to_mask(b, spacing, kZero));
      },
      py::arg("a"), py::arg("b"), py::arg("spacing") = kUnit);
}
