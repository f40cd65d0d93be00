// Python bindings for the main laboratory operations: slice-response
// synthesis, scene simulation, regressor training/inference, depth metrics,
// and coverage sweeps. Arrays are numpy (height, width) row-major.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gdl/estimate.hpp"
#include "gdl/eval.hpp"
#include "gdl/filter.hpp"
#include "gdl/rip.hpp"
#include "gdl/scene.hpp"
#include "gdl/sensor.hpp"

namespace py = pybind11;
using namespace gdl;

namespace {

Map2D<double> map_from_array(const py::array_t<double>& arr, const char* what) {
  const auto buf = arr.request();
  if (buf.ndim != 2)
    throw std::invalid_argument(std::string(what) + " must be a 2-D array");
  const int height = static_cast<int>(buf.shape[0]);
  const int width = static_cast<int>(buf.shape[1]);
  Map2D<double> map(width, height);
  const auto view = arr.unchecked<2>();
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) map.at(x, y) = view(y, x);
  return map;
}

py::array_t<double> array_from_map(const Map2D<double>& map) {
  py::array_t<double> arr({map.height(), map.width()});
  auto view = arr.mutable_unchecked<2>();
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) view(y, x) = map.at(x, y);
  return arr;
}

Mask mask_from_array(const py::array_t<std::uint8_t>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 2) throw std::invalid_argument("mask must be a 2-D array");
  const int height = static_cast<int>(buf.shape[0]);
  const int width = static_cast<int>(buf.shape[1]);
  Mask mask(width, height);
  const auto view = arr.unchecked<2>();
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) mask.at(x, y) = view(y, x) ? 1 : 0;
  return mask;
}

sensor::GatedStack stack_from_array(const py::array_t<std::uint16_t>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 3 || buf.shape[0] != 3)
    throw std::invalid_argument("slices must have shape (3, height, width)");
  const int height = static_cast<int>(buf.shape[1]);
  const int width = static_cast<int>(buf.shape[2]);
  sensor::GatedStack stack;
  const auto view = arr.unchecked<3>();
  for (int i = 0; i < 3; ++i) {
    stack.slices[i] = sensor::SliceImage(width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) stack.slices[i].at(x, y) = view(i, y, x);
  }
  return stack;
}

std::array<rip::RangeIntensityProfile, 3> standard_rips(double peak_counts) {
  const auto pulse =
      rip::make_profile(rip::ProfileKind::kRectangular, 200e-9, 1e-9);
  const auto gate =
      rip::make_profile(rip::ProfileKind::kRectangular, 200e-9, 1e-9);
  std::array<rip::RangeIntensityProfile, 3> rips;
  const double delays[3] = {200e-9, 400e-9, 600e-9};
  for (int i = 0; i < 3; ++i)
    rips[i] = rip::scaled_to_peak(
        rip::synthesize_rip(pulse, gate, delays[i], {}, 0.0, 150.0, 0.05),
        peak_counts);
  return rips;
}

}  // namespace

PYBIND11_MODULE(gdl_py, m) {
  m.doc() =
      "Gated-imaging laboratory: slice-response synthesis, scene simulation, "
      "per-pixel depth regression, metrics, and coverage filtering.";

  m.def(
      "synthesize_rip",
      [](const std::string& pulse_shape, double pulse_ns,
         const std::string& gate_shape, double gate_ns, double delay_ns,
         double r_min, double r_max, double dr, double peak) {
        const auto pulse = rip::make_profile(
            rip::profile_kind_from_string(pulse_shape), pulse_ns * 1e-9, 1e-9);
        const auto gate = rip::make_profile(
            rip::profile_kind_from_string(gate_shape), gate_ns * 1e-9, 1e-9);
        const auto prof = rip::scaled_to_peak(
            rip::synthesize_rip(pulse, gate, delay_ns * 1e-9, {}, r_min, r_max,
                                dr),
            peak);
        py::array_t<double> ranges(static_cast<py::ssize_t>(prof.samples.size()));
        py::array_t<double> counts(static_cast<py::ssize_t>(prof.samples.size()));
        auto rv = ranges.mutable_unchecked<1>();
        auto cv = counts.mutable_unchecked<1>();
        for (std::size_t i = 0; i < prof.samples.size(); ++i) {
          rv(static_cast<py::ssize_t>(i)) = prof.range_at(i);
          cv(static_cast<py::ssize_t>(i)) = prof.samples[i];
        }
        return py::make_tuple(ranges, counts);
      },
      py::arg("pulse_shape") = "rectangular", py::arg("pulse_ns") = 200.0,
      py::arg("gate_shape") = "rectangular", py::arg("gate_ns") = 200.0,
      py::arg("delay_ns") = 400.0, py::arg("r_min") = 0.0,
      py::arg("r_max") = 150.0, py::arg("dr") = 0.05, py::arg("peak") = 800.0,
      "Range-intensity profile of one gated slice as (ranges_m, counts).");

  m.def(
      "simulate",
      [](const std::string& kind, int width, int height, double r_near,
         double r_far, int shadow_patches, std::uint64_t scene_seed,
         double noise_a, double noise_b, std::uint64_t noise_seed,
         double peak) {
        scene::SceneSpec spec;
        spec.kind = scene::scene_kind_from_string(kind);
        spec.width = width;
        spec.height = height;
        spec.r_near = r_near;
        spec.r_far = r_far;
        spec.shadow_patches = shadow_patches;
        const scene::Scene sc = scene::generate_scene(spec, scene_seed);
        const auto rips = standard_rips(peak);
        const sensor::GatedStack stack =
            sensor::render_stack(sc, rips, {noise_a, noise_b, noise_seed});

        py::array_t<std::uint16_t> slices({3, height, width});
        auto view = slices.mutable_unchecked<3>();
        for (int i = 0; i < 3; ++i)
          for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
              view(i, y, x) = stack.slices[i].at(x, y);

        py::dict out;
        out["slices"] = slices;
        out["depth"] = array_from_map(sc.depth);
        out["albedo"] = array_from_map(sc.albedo);
        return out;
      },
      py::arg("kind") = "terrain", py::arg("width") = 64,
      py::arg("height") = 48, py::arg("r_near") = 31.0,
      py::arg("r_far") = 88.0, py::arg("shadow_patches") = 0,
      py::arg("scene_seed") = 1, py::arg("noise_a") = 1.0,
      py::arg("noise_b") = 4.0, py::arg("noise_seed") = 3,
      py::arg("peak") = 800.0,
      "Noisy 10-bit gated slices plus ground-truth depth and albedo, using "
      "the standard three-delay rectangular setup.");

  m.def(
      "train",
      [](const py::array_t<double>& z, const py::array_t<double>& r,
         const std::vector<int>& hidden, double learning_rate, int epochs,
         int batch_size, double val_fraction, bool aleatoric,
         std::uint64_t seed, double range_lo, double range_hi,
         const std::string& checkpoint_path) {
        const auto zb = z.request();
        const auto rb = r.request();
        if (zb.ndim != 2 || zb.shape[1] != 3)
          throw std::invalid_argument("z must have shape (n, 3)");
        if (rb.ndim != 1 || rb.shape[0] != zb.shape[0])
          throw std::invalid_argument("r must have shape (n,)");
        const auto zv = z.unchecked<2>();
        const auto rv = r.unchecked<1>();
        std::vector<estimate::PixelSample> samples(
            static_cast<std::size_t>(zb.shape[0]));
        for (py::ssize_t i = 0; i < zb.shape[0]; ++i) {
          samples[static_cast<std::size_t>(i)] = {
              {zv(i, 0), zv(i, 1), zv(i, 2)}, rv(i)};
        }

        std::vector<int> widths;
        widths.push_back(3);
        widths.insert(widths.end(), hidden.begin(), hidden.end());
        widths.push_back(2);
        const estimate::PixelRegressor init =
            estimate::init_regressor(widths, seed, range_lo, range_hi);
        estimate::TrainConfig tc;
        tc.learning_rate = learning_rate;
        tc.epochs = epochs;
        tc.batch_size = batch_size;
        tc.val_fraction = val_fraction;
        tc.aleatoric = aleatoric;
        tc.seed = seed;
        const estimate::TrainResult result =
            estimate::train_regressor(init, samples, tc);
        if (!checkpoint_path.empty())
          estimate::save_checkpoint(result.best, checkpoint_path);

        py::array_t<double> history(
            {static_cast<py::ssize_t>(result.history.size()),
             static_cast<py::ssize_t>(2)});
        auto hv = history.mutable_unchecked<2>();
        for (std::size_t e = 0; e < result.history.size(); ++e) {
          hv(static_cast<py::ssize_t>(e), 0) = result.history[e].train_loss;
          hv(static_cast<py::ssize_t>(e), 1) = result.history[e].val_mae;
        }
        py::dict out;
        out["history"] = history;
        out["best_epoch"] = result.best_epoch;
        out["best_val_mae"] =
            result.history[static_cast<std::size_t>(result.best_epoch - 1)]
                .val_mae;
        return out;
      },
      py::arg("z"), py::arg("r"), py::arg("hidden") = std::vector<int>{32, 32},
      py::arg("learning_rate") = 2e-2, py::arg("epochs") = 15,
      py::arg("batch_size") = 32, py::arg("val_fraction") = 0.2,
      py::arg("aleatoric") = true, py::arg("seed") = 0,
      py::arg("range_lo") = 31.0, py::arg("range_hi") = 88.0,
      py::arg("checkpoint_path") = "",
      "Train the per-pixel depth/uncertainty regressor on slice triples; "
      "returns the loss history and optionally saves the best checkpoint.");

  m.def(
      "infer",
      [](const std::string& checkpoint_path,
         const py::array_t<std::uint16_t>& slices) {
        const estimate::PixelRegressor model =
            estimate::load_checkpoint(checkpoint_path);
        const sensor::GatedStack stack = stack_from_array(slices);
        const estimate::EstimateMaps maps = estimate::infer_maps(model, stack);
        return py::make_tuple(array_from_map(maps.depth),
                              array_from_map(maps.log_sigma));
      },
      py::arg("checkpoint_path"), py::arg("slices"),
      "Per-pixel (depth_m, log_sigma) maps from a saved checkpoint.");

  m.def(
      "evaluate",
      [](const py::array_t<double>& pred, const py::array_t<double>& gt,
         const std::optional<py::array_t<std::uint8_t>>& mask, double r_lo,
         double r_hi) {
        const Map2D<double> pred_map = map_from_array(pred, "pred");
        const Map2D<double> gt_map = map_from_array(gt, "gt");
        const Mask m2 = mask ? mask_from_array(*mask)
                             : Mask(gt_map.width(), gt_map.height(), 1);
        const eval::EvalReport rep =
            eval::evaluate(pred_map, gt_map, m2, r_lo, r_hi);
        py::dict out;
        out["mae_m"] = rep.mae;
        out["rmse_m"] = rep.rmse;
        out["silog"] = rep.silog;
        out["delta1"] = rep.delta1;
        out["delta2"] = rep.delta2;
        out["delta3"] = rep.delta3;
        out["coverage"] = rep.coverage;
        out["valid_count"] = rep.valid_count;
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("mask") = std::nullopt,
      py::arg("r_lo") = 3.0, py::arg("r_hi") = 150.0,
      "Masked depth metrics (MAE/RMSE/SIlog/delta thresholds).");

  m.def(
      "sweep_uncertainty",
      [](const py::array_t<double>& depth, const py::array_t<double>& log_sigma,
         const py::array_t<double>& gt, const std::vector<double>& thresholds,
         double r_lo, double r_hi) {
        estimate::EstimateMaps maps{map_from_array(depth, "depth"),
                                    map_from_array(log_sigma, "log_sigma")};
        const Map2D<double> gt_map = map_from_array(gt, "gt");
        const Mask full(gt_map.width(), gt_map.height(), 1);
        const filter::FilterCurve curve = filter::sweep_uncertainty(
            maps, gt_map, full, thresholds, r_lo, r_hi);
        py::array_t<double> rows(
            {static_cast<py::ssize_t>(curve.points.size()),
             static_cast<py::ssize_t>(4)});
        auto view = rows.mutable_unchecked<2>();
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
          const auto& p = curve.points[i];
          view(static_cast<py::ssize_t>(i), 0) = p.threshold;
          view(static_cast<py::ssize_t>(i), 1) = p.coverage;
          view(static_cast<py::ssize_t>(i), 2) = p.mae_m;
          view(static_cast<py::ssize_t>(i), 3) = p.rmse_m;
        }
        return rows;
      },
      py::arg("depth"), py::arg("log_sigma"), py::arg("gt"),
      py::arg("thresholds"), py::arg("r_lo") = 3.0, py::arg("r_hi") = 150.0,
      "Coverage-vs-error curve rows (threshold, coverage, mae_m, rmse_m).");

  m.def(
      "threshold_for_coverage",
      [](const py::array_t<double>& log_sigma, double coverage) {
        return filter::threshold_for_coverage(
            map_from_array(log_sigma, "log_sigma"), coverage);
      },
      py::arg("log_sigma"), py::arg("coverage"),
      "Log-sigma cut that keeps the requested fraction of pixels.");
}
