#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdl/rip.hpp"
#include "gdl/scene.hpp"
#include "gdl/sensor.hpp"

namespace gdl::cli {

// Raised for malformed config files, unknown keys, and out-of-range values;
// the CLI maps it to the invalid-config exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything an experiment run needs, parsed from a TOML-style config file
// plus --set overrides. Defaults reproduce the standard desk-scale setup:
// three 200 ns rectangular slices delayed 200/400/600 ns on a 0-150 m grid.
struct ExperimentConfig {
  std::string output_dir = "out";
  // Where a command looks for artifacts of earlier stages (default: output_dir).
  std::string data_dir;

  scene::SceneSpec scene;
  std::uint64_t scene_seed = 1;

  int mask_lines = 24;
  double mask_dropout = 0.1;
  std::uint64_t mask_seed = 2;

  rip::ProfileKind pulse_shape = rip::ProfileKind::kRectangular;
  rip::ProfileKind gate_shape = rip::ProfileKind::kRectangular;
  double pulse_duration_ns = 200.0;
  double gate_duration_ns = 200.0;
  double profile_dt_ns = 1.0;
  std::array<double, 3> delays_ns = {200.0, 400.0, 600.0};
  double grid_r_min = 0.0;   // m
  double grid_r_max = 150.0; // m
  double grid_dr = 0.05;     // m
  double peak_counts = 800.0;
  rip::AttenuationKind attenuation = rip::AttenuationKind::kNone;
  double kappa = 0.0;  // 1/m

  sensor::NoiseParams noise{1.0, 4.0, 3};

  std::string estimator = "regressor";  // regressor | timeslice |
                                        // triangular_ratio | poly_ratio
  std::string timeslice_method = "weighted_average";
  double rising_threshold = 0.5;
  std::string checkpoint;  // regressor inference; default <data_dir>/checkpoint_best.gdlr

  int epochs = 15;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double val_fraction = 0.2;
  std::uint64_t train_seed = 4;
  std::vector<int> hidden = {32, 32};

  double lambda_s = 10.0;
  double lambda_adv = 0.0;  // must stay 0; nonzero is rejected at use
  std::vector<double> scale_weights = {1.0, 0.5, 0.25, 0.125};
  bool aleatoric = true;

  std::string filter_kind = "uncertainty";  // uncertainty | snr
  std::vector<double> thresholds;
  std::vector<double> coverages;  // alternative to explicit thresholds

  double eval_r_lo = 3.0;   // m
  double eval_r_hi = 150.0; // m
  std::string eval_pred;  // default <data_dir>/depth.fmap
  std::string eval_gt;    // default <data_dir>/gt_depth.fmap
  std::string eval_mask;  // empty: evaluate every pixel

  std::string render_kind = "depth";  // depth | uncertainty
  std::string render_input;           // overrides the kind-derived default
  std::string render_output = "render.pgm";

  std::string resolved_data_dir() const {
    return data_dir.empty() ? output_dir : data_dir;
  }
};

// Parses the file, applies "key=value" overrides, validates the schema.
// Unknown keys, duplicate keys, type mismatches, and a missing or wrong
// `config_version` all raise ConfigError.
ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides);

// Same, for config text already in memory (used by the override-only path
// and by tests).
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides);

}  // namespace gdl::cli
