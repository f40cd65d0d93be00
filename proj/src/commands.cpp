#include "gdl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <vector>

#include "gdl/error.hpp"
#include "gdl/estimate.hpp"
#include "gdl/eval.hpp"
#include "gdl/filter.hpp"
#include "gdl/io.hpp"
#include "gdl/loss.hpp"
#include "gdl/parallel.hpp"
#include "gdl/scene.hpp"
#include "gdl/sensor.hpp"

namespace fs = std::filesystem;

namespace gdl::cli {

namespace {

constexpr const char* kSliceNames[3] = {"slice_0.pgm", "slice_1.pgm",
                                        "slice_2.pgm"};
constexpr const char* kGtDepth = "gt_depth.fmap";
constexpr const char* kAlbedo = "albedo.fmap";
constexpr const char* kSparseMask = "sparse_mask.pgm";
constexpr const char* kCheckpointBest = "checkpoint_best.gdlr";
constexpr const char* kCheckpointLast = "checkpoint_last.gdlr";
constexpr const char* kHistory = "history.csv";
constexpr const char* kDepthMap = "depth.fmap";
constexpr const char* kLogSigmaMap = "log_sigma.fmap";
constexpr const char* kEvalCsv = "eval.csv";
constexpr const char* kEvalTxt = "eval.txt";
constexpr const char* kCurveCsv = "curve.csv";

fs::path ensure_output_dir(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
  return dir;
}

sensor::GatedStack read_stack(const fs::path& dir) {
  sensor::GatedStack stack;
  for (int i = 0; i < 3; ++i) {
    io::Pgm16 pgm = io::read_pgm16(dir / kSliceNames[i]);
    if (pgm.maxval != sensor::kMaxCount)
      throw IoError("slice " + (dir / kSliceNames[i]).string() +
                    " is not a 10-bit capture");
    stack.slices[i] = std::move(pgm.pixels);
  }
  if (!stack.slices[1].same_shape(stack.slices[0]) ||
      !stack.slices[2].same_shape(stack.slices[0]))
    throw IoError("slice dimensions disagree under " + dir.string());
  return stack;
}

Mask mask_from_pgm(const Map2D<std::uint8_t>& image) {
  Mask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      mask.at(x, y) = image.at(x, y) ? 1 : 0;
  return mask;
}

Mask full_mask(int width, int height) { return Mask(width, height, 1); }

// Shared log-sigma/spread threshold derivation for coverage targets.
std::vector<double> dedupe_consecutive(std::vector<double> v) {
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x != out.back()) out.push_back(x);
  return out;
}

double rip_peak_range(const rip::RangeIntensityProfile& r) {
  const auto it = std::max_element(r.samples.begin(), r.samples.end());
  return r.range_at(static_cast<std::size_t>(it - r.samples.begin()));
}

}  // namespace

std::array<rip::RangeIntensityProfile, 3> build_rips(const ExperimentConfig& cfg) {
  const rip::TemporalProfile pulse = rip::make_profile(
      cfg.pulse_shape, cfg.pulse_duration_ns * 1e-9, cfg.profile_dt_ns * 1e-9);
  const rip::TemporalProfile gate = rip::make_profile(
      cfg.gate_shape, cfg.gate_duration_ns * 1e-9, cfg.profile_dt_ns * 1e-9);
  const rip::AttenuationModel beta{cfg.attenuation, cfg.kappa};
  std::array<rip::RangeIntensityProfile, 3> rips;
  for (int i = 0; i < 3; ++i) {
    rips[i] = rip::scaled_to_peak(
        rip::synthesize_rip(pulse, gate, cfg.delays_ns[i] * 1e-9, beta,
                            cfg.grid_r_min, cfg.grid_r_max, cfg.grid_dr),
        cfg.peak_counts);
  }
  return rips;
}

void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = ensure_output_dir(cfg);

  const scene::Scene sc = scene::generate_scene(cfg.scene, cfg.scene_seed);
  const Mask mask = scene::sample_sparse_mask(
      sc.height, sc.width, cfg.mask_lines, cfg.mask_dropout, cfg.mask_seed);
  const auto rips = build_rips(cfg);
  const sensor::GatedStack stack = sensor::render_stack(sc, rips, cfg.noise);

  std::vector<std::string> names;
  for (int i = 0; i < 3; ++i) {
    io::write_pgm16(stack.slices[i], sensor::kMaxCount, out / kSliceNames[i]);
    names.push_back(kSliceNames[i]);
  }
  io::write_fmap(sc.depth, out / kGtDepth);
  names.push_back(kGtDepth);
  io::write_fmap(sc.albedo, out / kAlbedo);
  names.push_back(kAlbedo);
  Map2D<std::uint8_t> mask_img(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      mask_img.at(x, y) = mask.at(x, y) ? 255 : 0;
  io::write_pgm8(mask_img, out / kSparseMask);
  names.push_back(kSparseMask);
  io::write_manifest(out, names);

  const double saturated = sensor::saturate_check(stack);
  log << "simulate: " << sc.width << "x" << sc.height << " scene, mask coverage "
      << scene::coverage(mask) << ", saturated fraction " << saturated << "\n";
  if (saturated > 0.05)
    log << "simulate: warning: more than 5% of pixels are at full scale\n";
  log << "simulate: wrote " << names.size() << " files + manifest to "
      << out.string() << "\n";
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.lambda_adv != 0.0)
    throw UnsupportedFeatureError(
        "adversarial loss is not available; set loss.lambda_adv = 0");
  const fs::path out = ensure_output_dir(cfg);
  const fs::path data = cfg.resolved_data_dir();

  const sensor::GatedStack stack = read_stack(data);
  const Map2D<double> gt = io::read_fmap(data / kGtDepth);
  const Mask mask = mask_from_pgm(io::read_pgm8(data / kSparseMask));
  const auto samples = estimate::collect_samples(stack, gt, mask);
  log << "train: " << samples.size() << " samples from " << data.string()
      << "\n";

  std::vector<int> widths;
  widths.push_back(3);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(2);
  const estimate::PixelRegressor init = estimate::init_regressor(
      widths, cfg.train_seed, cfg.scene.r_near, cfg.scene.r_far);

  estimate::TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.val_fraction = cfg.val_fraction;
  tc.aleatoric = cfg.aleatoric;
  tc.seed = cfg.train_seed;
  const estimate::TrainResult result =
      estimate::train_regressor(init, samples, tc);

  estimate::save_checkpoint(result.best, out / kCheckpointBest);
  estimate::save_checkpoint(result.last, out / kCheckpointLast);
  {
    std::ofstream history(out / kHistory, std::ios::binary | std::ios::trunc);
    if (!history) throw IoError("cannot open " + (out / kHistory).string());
    history << "epoch,train_loss,val_mae\n";
    char line[128];
    for (std::size_t e = 0; e < result.history.size(); ++e) {
      std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", e + 1,
                    result.history[e].train_loss, result.history[e].val_mae);
      history << line;
    }
    if (!history) throw IoError("write failed for " + (out / kHistory).string());
  }
  io::write_manifest(out, {kCheckpointBest, kCheckpointLast, kHistory});

  log << "train: best epoch " << result.best_epoch << " with validation MAE "
      << result.history[static_cast<std::size_t>(result.best_epoch - 1)].val_mae
      << " m over " << result.history.size() << " epochs\n";
}

namespace {

// Depth map from a per-pixel closure; pixels without usable signal get NaN.
template <typename Fn>
Map2D<double> per_pixel_depth(const sensor::GatedStack& stack, const Fn& fn) {
  Map2D<double> depth(stack.width(), stack.height());
  parallel_rows(stack.height(), [&](int y) {
    for (int x = 0; x < stack.width(); ++x) {
      const double z0 = stack.slices[0].at(x, y);
      const double z1 = stack.slices[1].at(x, y);
      const double z2 = stack.slices[2].at(x, y);
      try {
        depth.at(x, y) = fn(z0, z1, z2);
      } catch (const NoSignalError&) {
        depth.at(x, y) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });
  return depth;
}

}  // namespace

void cmd_infer(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = ensure_output_dir(cfg);
  const fs::path data = cfg.resolved_data_dir();
  const sensor::GatedStack stack = read_stack(data);

  std::vector<std::string> names;
  if (cfg.estimator == "regressor") {
    const fs::path ckpt = cfg.checkpoint.empty()
                              ? data / kCheckpointBest
                              : fs::path(cfg.checkpoint);
    const estimate::PixelRegressor model = estimate::load_checkpoint(ckpt);
    const estimate::EstimateMaps maps = estimate::infer_maps(model, stack);
    io::write_fmap(maps.depth, out / kDepthMap);
    io::write_fmap(maps.log_sigma, out / kLogSigmaMap);
    names = {kDepthMap, kLogSigmaMap};
    log << "infer: regressor checkpoint " << ckpt.string() << " applied to "
        << stack.width() << "x" << stack.height() << " stack\n";
  } else if (cfg.estimator == "timeslice") {
    estimate::TimesliceMethod method = estimate::TimesliceMethod::kWeightedAverage;
    if (cfg.timeslice_method == "rising_edge")
      method = estimate::TimesliceMethod::kRisingEdge;
    else if (cfg.timeslice_method == "argmax")
      method = estimate::TimesliceMethod::kArgmax;
    const std::array<double, 3> delays_s = {cfg.delays_ns[0] * 1e-9,
                                            cfg.delays_ns[1] * 1e-9,
                                            cfg.delays_ns[2] * 1e-9};
    const Map2D<double> depth =
        per_pixel_depth(stack, [&](double z0, double z1, double z2) {
          const std::array<double, 3> z = {z0, z1, z2};
          return estimate::estimate_timeslice(z, delays_s, method,
                                              cfg.rising_threshold);
        });
    io::write_fmap(depth, out / kDepthMap);
    names = {kDepthMap};
    log << "infer: timeslice (" << cfg.timeslice_method << ") over 3 delays\n";
  } else if (cfg.estimator == "triangular_ratio") {
    const auto rips = build_rips(cfg);
    const double p0 = rip_peak_range(rips[0]);
    const double p1 = rip_peak_range(rips[1]);
    const double p2 = rip_peak_range(rips[2]);
    const Map2D<double> depth =
        per_pixel_depth(stack, [&](double z0, double z1, double z2) {
          // Pick the adjacent slice pair carrying more light.
          if (z0 + z1 >= z1 + z2)
            return estimate::estimate_triangular_ratio(z0, z1, p0, p1);
          return estimate::estimate_triangular_ratio(z1, z2, p1, p2);
        });
    io::write_fmap(depth, out / kDepthMap);
    names = {kDepthMap};
    log << "infer: triangular ratio with slice peaks " << p0 << "/" << p1
        << "/" << p2 << " m\n";
  } else {  // poly_ratio
    const auto rips = build_rips(cfg);
    const auto [lo, hi] = rip::overlap_span({rips[0], rips[1], rips[2]});
    std::vector<std::array<double, 3>> zs;
    std::vector<double> rs;
    for (double r = lo; r <= hi; r += cfg.grid_dr) {
      const std::array<double, 3> z = {rips[0].value(r), rips[1].value(r),
                                       rips[2].value(r)};
      if (z[0] + z[1] + z[2] <= 0.0) continue;
      zs.push_back(z);
      rs.push_back(r);
    }
    const estimate::PolyRatioModel model = estimate::fit_ratio_polynomial(zs, rs);
    log << "infer: ratio polynomial fitted on [" << lo << ", " << hi
        << "] m, residual RMSE " << model.residual_rmse << " m\n";
    const Map2D<double> depth =
        per_pixel_depth(stack, [&](double z0, double z1, double z2) {
          return model.estimate(z0, z1, z2);
        });
    io::write_fmap(depth, out / kDepthMap);
    names = {kDepthMap};
  }
  io::write_manifest(out, names);
  log << "infer: wrote depth map(s) to " << out.string() << "\n";
}

void cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = ensure_output_dir(cfg);
  const fs::path data = cfg.resolved_data_dir();
  const fs::path pred_path =
      cfg.eval_pred.empty() ? data / kDepthMap : fs::path(cfg.eval_pred);
  const fs::path gt_path =
      cfg.eval_gt.empty() ? data / kGtDepth : fs::path(cfg.eval_gt);

  const Map2D<double> pred = io::read_fmap(pred_path);
  const Map2D<double> gt = io::read_fmap(gt_path);
  Mask mask = cfg.eval_mask.empty()
                  ? full_mask(gt.width(), gt.height())
                  : mask_from_pgm(io::read_pgm8(cfg.eval_mask));

  // NaN predictions mark pixels without signal; exclude them like an
  // estimator dropout rather than failing the whole report.
  long long dropped = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x)
      if (mask.at(x, y) && std::isnan(pred.at(x, y))) {
        mask.at(x, y) = 0;
        ++dropped;
      }
  if (dropped > 0)
    log << "eval: excluded " << dropped << " pixels without a prediction\n";

  const eval::EvalReport report =
      eval::evaluate(pred, gt, mask, cfg.eval_r_lo, cfg.eval_r_hi);
  eval::write_report_csv(report, out / kEvalCsv);
  {
    std::ofstream txt(out / kEvalTxt, std::ios::binary | std::ios::trunc);
    if (!txt) throw IoError("cannot open " + (out / kEvalTxt).string());
    txt << eval::report_table(report);
    if (!txt) throw IoError("write failed for " + (out / kEvalTxt).string());
  }
  io::write_manifest(out, {kEvalCsv, kEvalTxt});
  log << eval::report_table(report);
}

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = ensure_output_dir(cfg);
  const fs::path data = cfg.resolved_data_dir();

  const Map2D<double> depth = io::read_fmap(
      cfg.eval_pred.empty() ? data / kDepthMap : fs::path(cfg.eval_pred));
  const Map2D<double> gt = io::read_fmap(
      cfg.eval_gt.empty() ? data / kGtDepth : fs::path(cfg.eval_gt));
  const Mask gt_mask = cfg.eval_mask.empty()
                           ? full_mask(gt.width(), gt.height())
                           : mask_from_pgm(io::read_pgm8(cfg.eval_mask));

  if (cfg.thresholds.empty() == cfg.coverages.empty())
    throw ConfigError(
        "sweep needs exactly one of filter.thresholds or filter.coverages");

  estimate::EstimateMaps maps;
  maps.depth = depth;
  filter::FilterCurve curve;
  if (cfg.filter_kind == "uncertainty") {
    maps.log_sigma = io::read_fmap(data / kLogSigmaMap);
    std::vector<double> thresholds = cfg.thresholds;
    if (!cfg.coverages.empty()) {
      for (double c : cfg.coverages)
        thresholds.push_back(filter::threshold_for_coverage(maps.log_sigma, c));
      thresholds = dedupe_consecutive(thresholds);
    }
    curve = filter::sweep_uncertainty(maps, gt, gt_mask, thresholds,
                                      cfg.eval_r_lo, cfg.eval_r_hi);
  } else {
    const sensor::GatedStack stack = read_stack(data);
    std::vector<double> thresholds = cfg.thresholds;
    if (!cfg.coverages.empty()) {
      const Map2D<double> spread = filter::slice_spread(stack);
      for (double c : cfg.coverages)
        thresholds.push_back(filter::spread_threshold_for_coverage(spread, c));
      thresholds = dedupe_consecutive(thresholds);
    }
    curve = filter::sweep_snr(maps, stack, gt, gt_mask, thresholds,
                              cfg.eval_r_lo, cfg.eval_r_hi);
  }

  filter::write_csv(curve, out / kCurveCsv);
  io::write_manifest(out, {kCurveCsv});
  log << "sweep: " << cfg.filter_kind << " filter, " << curve.points.size()
      << " points\n";
  for (const auto& p : curve.points)
    log << "  threshold " << p.threshold << ": coverage " << p.coverage
        << ", MAE " << p.mae_m << " m\n";
}

void cmd_render(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = ensure_output_dir(cfg);
  const fs::path data = cfg.resolved_data_dir();
  const fs::path input =
      cfg.render_input.empty()
          ? data / (cfg.render_kind == "depth" ? kDepthMap : kLogSigmaMap)
          : fs::path(cfg.render_input);
  const Map2D<double> map = io::read_fmap(input);
  io::write_pgm8(io::normalize_to_gray(map), out / cfg.render_output);
  io::write_manifest(out, {cfg.render_output});
  log << "render: " << input.string() << " -> "
      << (out / cfg.render_output).string() << "\n";
}

}  // namespace gdl::cli
